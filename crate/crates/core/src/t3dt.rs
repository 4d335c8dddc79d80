//! The randomized no-loss decision-tree policy.
//!
//! Priority order on every bot turn:
//!
//! 1. complete a line (`WIN`),
//! 2. block the opponent's line (`BLOCK`),
//! 3. the opening tree for the first two or three bot moves,
//! 4. in [`PolicyMode::Safe`] only, make a fork or defuse the opponent's,
//! 5. any empty cell (`RANDOM-FILL`).
//!
//! Every rule is phrased geometrically (corner, edge, centre, adjacency,
//! distance), so the policy commutes with the symmetries of the square.
//! Candidate sets are never narrowed by cell index.

use crate::board::{
    corners_adjacent_to, diag_opposite, min_distance_corners, nearer_edges, opposite_edge,
    shared_corner, Board, Cell, CellClass, CellSet, Mark,
};
use crate::policy::{
    check_turn, Decision, GameContext, Policy, PolicyError, PolicyMode, Reason, RuleId,
};

#[derive(Debug, Clone, Copy, Default)]
pub struct T3dt {
    pub mode: PolicyMode,
}

impl T3dt {
    pub fn new(mode: PolicyMode) -> T3dt {
        T3dt { mode }
    }

    pub fn candidates(&self, ctx: &GameContext) -> Result<Decision, PolicyError> {
        candidates(ctx, self.mode)
    }
}

impl Policy for T3dt {
    fn name(&self) -> String {
        "t3dt".into()
    }

    fn decide(&self, ctx: &GameContext) -> Result<Decision, PolicyError> {
        candidates(ctx, self.mode)
    }

    fn mode(&self) -> Option<PolicyMode> {
        Some(self.mode)
    }
}

/// Opening weights: each class of cell gets a third, split evenly inside
/// the class.
pub fn first_move_weights() -> [f64; 9] {
    let mut w = [0.0; 9];
    for cell in Cell::ALL {
        w[cell.index()] = match cell.class() {
            CellClass::Centre => 1.0 / 3.0,
            CellClass::Corner | CellClass::Edge => 1.0 / 12.0,
        };
    }
    w
}

pub fn candidates(ctx: &GameContext, mode: PolicyMode) -> Result<Decision, PolicyError> {
    check_turn(ctx)?;
    let board = ctx.board();
    let bot = ctx.bot_mark();
    let opp = bot.opponent();

    if board.move_count() == 0 {
        return Ok(Decision::weighted(
            first_move_weights(),
            Reason::Rule(RuleId::FirstRandom),
        ));
    }

    let wins = board.winning_moves(bot);
    if !wins.is_empty() {
        return Ok(rule(wins, RuleId::Win));
    }
    let blocks = board.winning_moves(opp);
    if !blocks.is_empty() {
        return Ok(rule(blocks, RuleId::Block));
    }

    if let Some((id, targets)) = tree_rule(ctx.moves(), ctx.bot_started(), board) {
        let targets = targets.intersection(board.empty_cells());
        if !targets.is_empty() {
            return Ok(rule(targets, id));
        }
    }

    if mode == PolicyMode::Safe {
        let forks = board.fork_moves(bot);
        if !forks.is_empty() {
            return Ok(rule(forks, RuleId::ForkMake));
        }
        let defences = fork_defences(board, bot);
        if !defences.is_empty() {
            return Ok(rule(defences, RuleId::ForkBlock));
        }
    }

    Ok(rule(board.empty_cells(), RuleId::RandomFill))
}

fn rule(set: CellSet, id: RuleId) -> Decision {
    Decision::uniform(set, Reason::Rule(id))
}

fn one(cell: Cell) -> CellSet {
    std::iter::once(cell).collect()
}

fn free_corners(board: &Board) -> CellSet {
    CellSet::corners().intersection(board.empty_cells())
}

fn fork_corners(board: &Board, mark: Mark) -> CellSet {
    board.fork_moves(mark).intersection(CellSet::corners())
}

/// Looks up the opening tree. `moves` is the full move order so far and
/// `board` the position it produced. Returns `None` once the tree has
/// nothing to say, including when an earlier bot move did not follow it.
pub(crate) fn tree_rule(
    moves: &[Cell],
    bot_started: bool,
    board: &Board,
) -> Option<(RuleId, CellSet)> {
    if bot_started {
        bot_first_rule(moves, board)
    } else {
        opponent_first_rule(moves, board)
    }
}

/// Replays the prefix before our `k`-th move and checks the tree would have
/// allowed the move we actually made.
fn followed_tree(moves: &[Cell], bot_started: bool, prefix_len: usize) -> Option<RuleId> {
    let prefix = &moves[..prefix_len];
    let first = if bot_started { Mark::X } else { Mark::O };
    let mut board = Board::new(first);
    for &cell in prefix {
        board = board.place_unchecked(cell);
    }
    let (id, targets) = tree_rule(prefix, bot_started, &board)?;
    targets.contains(moves[prefix_len]).then_some(id)
}

fn bot_first_rule(moves: &[Cell], board: &Board) -> Option<(RuleId, CellSet)> {
    match moves.len() {
        2 => {
            let (x1, o1) = (moves[0], moves[1]);
            match (x1.class(), o1.class()) {
                (CellClass::Corner, CellClass::Edge) => {
                    Some((RuleId::CornerEdge, one(Cell::CENTRE)))
                }
                (CellClass::Corner, CellClass::Corner) => {
                    Some((RuleId::CornerCorner, free_corners(board)))
                }
                (CellClass::Corner, CellClass::Centre) => {
                    Some((RuleId::CornerCentre, one(diag_opposite(x1).ok()?)))
                }
                (CellClass::Edge, CellClass::Corner) => {
                    Some((RuleId::EdgeCorner, one(Cell::CENTRE)))
                }
                (CellClass::Edge, CellClass::Edge) => {
                    if nearer_edges(x1).ok()?.contains(o1) {
                        Some((RuleId::EdgeNearEdge, one(shared_corner(x1, o1).ok()?)))
                    } else if opposite_edge(x1).ok()? == o1 {
                        Some((RuleId::EdgeOppEdge, corners_adjacent_to(x1).ok()?))
                    } else {
                        None
                    }
                }
                (CellClass::Edge, CellClass::Centre) => {
                    Some((RuleId::EdgeCentre, corners_adjacent_to(x1).ok()?))
                }
                (CellClass::Centre, CellClass::Edge) => {
                    Some((RuleId::CentreEdge, CellSet::corners()))
                }
                (CellClass::Centre, CellClass::Corner) => {
                    Some((RuleId::CentreCorner, one(diag_opposite(o1).ok()?)))
                }
                _ => None,
            }
        }
        4 => {
            let branch = followed_tree(moves, true, 2)?;
            let (o1, o2) = (moves[1], moves[3]);
            let bot = board.to_move();
            match branch {
                RuleId::CornerEdge => Some((branch, fork_corners(board, bot))),
                RuleId::CornerCorner => Some((branch, free_corners(board))),
                RuleId::EdgeCorner => Some((branch, CellSet::edges())),
                RuleId::EdgeNearEdge => Some((branch, one(Cell::CENTRE))),
                RuleId::EdgeOppEdge => {
                    let anchors: CellSet = [o1, o2].into_iter().collect();
                    Some((branch, min_distance_corners(anchors, free_corners(board))))
                }
                RuleId::CentreEdge => Some((branch, fork_corners(board, bot))),
                RuleId::CentreCorner if !o2.is_corner() => Some((branch, fork_corners(board, bot))),
                _ => None,
            }
        }
        _ => None,
    }
}

fn opponent_first_rule(moves: &[Cell], board: &Board) -> Option<(RuleId, CellSet)> {
    match moves.len() {
        1 => {
            let o1 = moves[0];
            match o1.class() {
                CellClass::Corner => Some((RuleId::OppCorner, one(Cell::CENTRE))),
                CellClass::Edge => Some((RuleId::OppEdge, corners_adjacent_to(o1).ok()?)),
                CellClass::Centre => Some((RuleId::OppCentre, CellSet::corners())),
            }
        }
        3 => {
            let branch = followed_tree(moves, false, 1)?;
            let (o1, o2) = (moves[0], moves[2]);
            match branch {
                RuleId::OppCorner => match o2.class() {
                    CellClass::Corner => Some((RuleId::OppCornerCorner, CellSet::edges())),
                    CellClass::Edge => {
                        let anchors: CellSet = [o1, o2].into_iter().collect();
                        Some((
                            RuleId::OppCornerEdge,
                            min_distance_corners(anchors, free_corners(board)),
                        ))
                    }
                    CellClass::Centre => None,
                },
                RuleId::OppEdge => Some((branch, one(Cell::CENTRE))),
                RuleId::OppCentre => Some((branch, free_corners(board))),
                _ => None,
            }
        }
        _ => None,
    }
}

/// Moves that leave the opponent without a fork. A move that makes a
/// threat forces the reply, so it only has to survive that one reply;
/// a quiet move must leave no fork at all. Threat-making defences are
/// preferred. Empty when the opponent has no fork to play.
fn fork_defences(board: &Board, bot: Mark) -> CellSet {
    let opp = bot.opponent();
    let forks = board.fork_moves(opp);
    if forks.is_empty() {
        return CellSet::EMPTY;
    }
    let mut forcing = CellSet::EMPTY;
    let mut quiet = CellSet::EMPTY;
    for cell in board.empty_cells() {
        let next = board.place_unchecked(cell);
        let threats = next.winning_moves(bot);
        match threats.len() {
            0 => {
                if next.fork_moves(opp).is_empty() {
                    quiet.insert(cell);
                }
            }
            1 => {
                let reply = threats.iter().next().unwrap();
                let after = next.place_unchecked(reply);
                if after.winning_moves(opp).len() < 2 {
                    forcing.insert(cell);
                }
            }
            _ => forcing.insert(cell),
        }
    }
    if !forcing.is_empty() {
        forcing
    } else if !quiet.is_empty() {
        quiet
    } else {
        forks
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(i: usize) -> Cell {
        Cell::new(i).unwrap()
    }

    fn set(idx: &[usize]) -> CellSet {
        idx.iter().map(|&i| c(i)).collect()
    }

    fn ctx(bot_started: bool, moves: &[usize]) -> GameContext {
        let cells: Vec<Cell> = moves.iter().map(|&i| c(i)).collect();
        GameContext::from_moves(Mark::X, bot_started, &cells).unwrap()
    }

    fn decide(bot_started: bool, moves: &[usize]) -> Decision {
        candidates(&ctx(bot_started, moves), PolicyMode::Safe).unwrap()
    }

    #[test]
    fn opening_distribution() {
        let d = decide(true, &[]);
        assert_eq!(d.rule(), Some(RuleId::FirstRandom));
        assert_eq!(d.candidates().len(), 9);
        assert!((d.weight(c(4)) - 1.0 / 3.0).abs() < 1e-12);
        assert!((d.weight(c(0)) - 1.0 / 12.0).abs() < 1e-12);
        assert!((d.weight(c(1)) - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn bot_first_second_moves() {
        let d = decide(true, &[0, 5]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[4]), Some(RuleId::CornerEdge))
        );
        let d = decide(true, &[0, 8]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[2, 6]), Some(RuleId::CornerCorner))
        );
        let d = decide(true, &[0, 4]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[8]), Some(RuleId::CornerCentre))
        );
        let d = decide(true, &[1, 0]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[4]), Some(RuleId::EdgeCorner))
        );
        let d = decide(true, &[1, 3]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[0]), Some(RuleId::EdgeNearEdge))
        );
        let d = decide(true, &[1, 7]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[0, 2]), Some(RuleId::EdgeOppEdge))
        );
        let d = decide(true, &[1, 4]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[0, 2]), Some(RuleId::EdgeCentre))
        );
        let d = decide(true, &[4, 1]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[0, 2, 6, 8]), Some(RuleId::CentreEdge))
        );
        let d = decide(true, &[4, 0]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[8]), Some(RuleId::CentreCorner))
        );
    }

    #[test]
    fn bot_first_third_moves() {
        // corner, edge, centre, forced corner block: empty-V fork corner
        let d = decide(true, &[0, 1, 4, 8]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[6]), Some(RuleId::CornerEdge))
        );
        // corner, opposite corner, corner, forced edge block: last corner
        let d = decide(true, &[0, 8, 2, 1]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[6]), Some(RuleId::CornerCorner))
        );
        // L-shaped fork through the centre
        let d = decide(true, &[1, 3, 0, 2]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[4]), Some(RuleId::EdgeNearEdge))
        );
        // opposite edge: closest corner to both O marks
        let d = decide(true, &[1, 7, 0, 2]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[8]), Some(RuleId::EdgeOppEdge))
        );
        // edge, corner, centre, forced block: any empty edge
        let d = decide(true, &[1, 0, 4, 7]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[3, 5]), Some(RuleId::EdgeCorner))
        );
        // centre, edge, corner, forced block
        let d = decide(true, &[4, 1, 0, 8]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[6]), Some(RuleId::CentreEdge))
        );
        // centre, corner, opposite corner, O on an edge
        let d = decide(true, &[4, 0, 8, 5]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[6]), Some(RuleId::CentreCorner))
        );
    }

    #[test]
    fn opponent_first_moves() {
        let d = decide(false, &[0]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[4]), Some(RuleId::OppCorner))
        );
        let d = decide(false, &[1]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[0, 2]), Some(RuleId::OppEdge))
        );
        let d = decide(false, &[4]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[0, 2, 6, 8]), Some(RuleId::OppCentre))
        );
        let d = decide(false, &[0, 4, 8]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[1, 3, 5, 7]), Some(RuleId::OppCornerCorner))
        );
        // top-left is the free corner nearest both O moves
        let d = decide(false, &[6, 4, 1]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[0]), Some(RuleId::OppCornerEdge))
        );
        let d = decide(false, &[1, 0, 8]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[4]), Some(RuleId::OppEdge))
        );
        let d = decide(false, &[4, 0, 8]);
        assert_eq!(
            (d.candidates(), d.rule()),
            (set(&[2, 6]), Some(RuleId::OppCentre))
        );
    }

    #[test]
    fn win_and_block_take_priority() {
        let slow_win =
            GameContext::from_moves(Mark::X, false, &[c(0), c(4), c(1), c(2), c(7)]).unwrap();
        assert_eq!(slow_win.board().to_string(), "OOX.X..O.");
        let d = candidates(&slow_win, PolicyMode::Strict).unwrap();
        assert_eq!((d.candidates(), d.rule()), (set(&[6]), Some(RuleId::Win)));
        // O threatens 2 after a corner start and an adjacent edge
        let d = decide(false, &[0, 4, 1]);
        assert_eq!((d.candidates(), d.rule()), (set(&[2]), Some(RuleId::Block)));
    }

    #[test]
    fn fork_defence_covers_the_strict_mode_hole() {
        // edge, corner, centre, block, edge, block: O is one move from a fork
        let moves = [1, 0, 4, 7, 3, 5];
        let strict = candidates(&ctx(true, &moves), PolicyMode::Strict).unwrap();
        assert_eq!(strict.rule(), Some(RuleId::RandomFill));
        let safe = decide(true, &moves);
        assert_eq!(safe.rule(), Some(RuleId::ForkBlock));
        for cell in safe.candidates() {
            let after = ctx(true, &moves).play(cell).unwrap();
            let opp_forks = after.board().fork_moves(Mark::O);
            let threats = after.board().winning_moves(Mark::X);
            assert!(opp_forks.is_empty() || !threats.is_empty(), "{cell}");
        }
    }

    #[test]
    fn off_tree_history_falls_through() {
        // X1 centre, O1 edge, X2 on an edge (not what the tree would play)
        let d = decide(true, &[4, 1, 3, 8]);
        assert_ne!(d.rule(), Some(RuleId::CentreEdge));
    }

    #[test]
    fn rejects_terminal_and_wrong_turn() {
        let done = ctx(true, &[0, 3, 1, 4, 2]);
        assert_eq!(
            candidates(&done, PolicyMode::Safe),
            Err(PolicyError::Terminal)
        );
        let theirs = ctx(true, &[0]);
        assert_eq!(
            candidates(&theirs, PolicyMode::Safe),
            Err(PolicyError::NotOurTurn(Mark::X))
        );
    }
}
