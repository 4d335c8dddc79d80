//! Exhaustive game-tree enumeration and the no-loss prover.
//!
//! The prover walks the full branch product: at the policy's turns it
//! follows every cell in the decision's support, at the opponent's turns
//! every legal move. A policy is no-loss exactly when no leaf of that tree is
//! an opponent win. Nothing is sampled.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Board, BoardError, Cell, Mark, Outcome};
use crate::game::GameRecord;
use crate::minimax::{aba_move, mm_move, SearchResult};
use crate::policy::{Decision, GameContext, Policy, PolicyError, PolicyMode, Reason};

/// Loss transcripts kept per report; the count is always exact.
pub const MAX_STORED_LOSSES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EnumerationCensus {
    pub total_games: u64,
    pub x_wins: u64,
    pub o_wins: u64,
    pub draws: u64,
    /// Game length in plies → number of games.
    pub games_by_length: BTreeMap<usize, u64>,
}

impl EnumerationCensus {
    pub fn win_ratio(&self) -> f64 {
        self.x_wins as f64 / self.o_wins as f64
    }

    fn record(&mut self, outcome: Outcome, length: usize) {
        self.total_games += 1;
        match outcome {
            Outcome::XWin => self.x_wins += 1,
            Outcome::OWin => self.o_wins += 1,
            _ => self.draws += 1,
        }
        *self.games_by_length.entry(length).or_default() += 1;
    }
}

impl Add for EnumerationCensus {
    type Output = EnumerationCensus;

    fn add(mut self, other: EnumerationCensus) -> EnumerationCensus {
        self.total_games += other.total_games;
        self.x_wins += other.x_wins;
        self.o_wins += other.o_wins;
        self.draws += other.draws;
        for (len, n) in other.games_by_length {
            *self.games_by_length.entry(len).or_default() += n;
        }
        self
    }
}

impl fmt::Display for EnumerationCensus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "total_games {}", self.total_games)?;
        writeln!(f, "x_wins {}", self.x_wins)?;
        writeln!(f, "o_wins {}", self.o_wins)?;
        writeln!(f, "draws {}", self.draws)?;
        writeln!(f, "x_to_o_ratio {:.4}", self.win_ratio())?;
        for (len, n) in &self.games_by_length {
            writeln!(f, "length_{len} {n}")?;
        }
        Ok(())
    }
}

/// Every legal move sequence from the empty board (X first), each stopped
/// at a win or a full board. Symmetric games are counted separately.
pub fn enumerate_games() -> EnumerationCensus {
    let mut census = EnumerationCensus::default();
    walk_games(&Board::new(Mark::X), &mut census);
    census
}

/// Same counts as [`enumerate_games`], one thread per opening move.
pub fn enumerate_games_parallel() -> EnumerationCensus {
    let root = Board::new(Mark::X);
    std::thread::scope(|scope| {
        let handles: Vec<_> = Cell::ALL
            .into_iter()
            .map(|cell| {
                scope.spawn(move || {
                    let mut census = EnumerationCensus::default();
                    walk_games(&root.place_unchecked(cell), &mut census);
                    census
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("enumeration thread panicked"))
            .fold(EnumerationCensus::default(), Add::add)
    })
}

fn walk_games(board: &Board, census: &mut EnumerationCensus) {
    let outcome = board.outcome();
    if outcome.is_terminal() {
        census.record(outcome, board.move_count());
        return;
    }
    for cell in board.empty_cells() {
        walk_games(&board.place_unchecked(cell), census);
    }
}

/// Every distinct position reachable from the empty board when `first`
/// opens, terminal ones included.
pub fn reachable_positions(first: Mark) -> Vec<Board> {
    let mut seen = HashSet::new();
    let mut stack = vec![Board::new(first)];
    while let Some(board) = stack.pop() {
        if !seen.insert(board) {
            continue;
        }
        if board.outcome().is_terminal() {
            continue;
        }
        for cell in board.empty_cells() {
            stack.push(board.place_unchecked(cell));
        }
    }
    let mut out: Vec<Board> = seen.into_iter().collect();
    out.sort_by_key(|b| (b.move_count(), b.to_string()));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    First,
    Second,
    Both,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::First => "first",
            Role::Second => "second",
            Role::Both => "both",
        })
    }
}

impl FromStr for Role {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "first" => Ok(Role::First),
            "second" => Ok(Role::Second),
            "both" => Ok(Role::Both),
            other => Err(BoardError::Parse(format!("unknown role {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub policy: String,
    pub role: Role,
    pub mode: Option<PolicyMode>,
    /// Opening moves every explored game was forced to start with.
    pub opening: Vec<Cell>,
    /// Leaves of the branch product.
    pub games: u64,
    pub wins: u64,
    pub draws: u64,
    pub loss_count: u64,
    /// Transcripts of the first [`MAX_STORED_LOSSES`] losses found.
    pub losses: Vec<String>,
    /// (state, candidate) pairs explored at the policy's turns.
    pub branch_nodes: u64,
}

impl VerificationReport {
    fn empty(policy: &dyn Policy, role: Role, opening: &[Cell]) -> VerificationReport {
        VerificationReport {
            policy: policy.name(),
            role,
            mode: policy.mode(),
            opening: opening.to_vec(),
            games: 0,
            wins: 0,
            draws: 0,
            loss_count: 0,
            losses: Vec::new(),
            branch_nodes: 0,
        }
    }

    pub fn is_no_loss(&self) -> bool {
        self.loss_count == 0
    }

    fn merge(mut self, other: VerificationReport, role: Role) -> VerificationReport {
        self.role = role;
        self.games += other.games;
        self.wins += other.wins;
        self.draws += other.draws;
        self.loss_count += other.loss_count;
        self.branch_nodes += other.branch_nodes;
        for t in other.losses {
            if self.losses.len() < MAX_STORED_LOSSES {
                self.losses.push(t);
            }
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("{policy} played illegal cell {cell}\n{transcript}")]
    Illegal {
        policy: String,
        cell: Cell,
        transcript: String,
    },
    #[error("{policy} failed after\n{transcript}: {source}")]
    Policy {
        policy: String,
        transcript: String,
        source: PolicyError,
    },
    #[error("opening move {cell} at ply {ply} is not one {policy} would play")]
    OffPolicy {
        policy: String,
        cell: Cell,
        ply: usize,
    },
    #[error(transparent)]
    Board(#[from] BoardError),
}

/// Proves or refutes that `policy`, holding X, never loses in `role`.
pub fn verify_no_loss(policy: &dyn Policy, role: Role) -> Result<VerificationReport, VerifyError> {
    match role {
        Role::First => verify_opening(policy, true, &[]),
        Role::Second => verify_opening(policy, false, &[]),
        Role::Both => {
            let first = verify_opening(policy, true, &[])?;
            let second = verify_opening(policy, false, &[])?;
            Ok(first.merge(second, Role::Both))
        }
    }
}

/// Like [`verify_no_loss`] but only over games that begin with `opening`.
/// Policy moves inside the opening must lie in the policy's support.
pub fn verify_opening(
    policy: &dyn Policy,
    bot_first: bool,
    opening: &[Cell],
) -> Result<VerificationReport, VerifyError> {
    let role = if bot_first { Role::First } else { Role::Second };
    let mut walker = Walker {
        policy,
        cache: HashMap::new(),
        path: GameRecord::new(),
        report: VerificationReport::empty(policy, role, opening),
    };
    let mut ctx = GameContext::new(Mark::X, bot_first);
    for (i, &cell) in opening.iter().enumerate() {
        let mover = ctx.board().to_move();
        let reason = if ctx.is_bot_turn() {
            let decision = walker.decide(&ctx)?;
            if !decision.candidates().contains(cell) {
                return Err(VerifyError::OffPolicy {
                    policy: policy.name(),
                    cell,
                    ply: i + 1,
                });
            }
            decision.reason()
        } else {
            Reason::Any
        };
        ctx = ctx.play(cell)?;
        walker.path.push(mover, cell, reason);
    }
    walker.walk(&ctx)?;
    Ok(walker.report)
}

struct Walker<'a> {
    policy: &'a dyn Policy,
    cache: HashMap<Board, Decision>,
    path: GameRecord,
    report: VerificationReport,
}

impl Walker<'_> {
    fn decide(&mut self, ctx: &GameContext) -> Result<Decision, VerifyError> {
        if self.policy.board_only() {
            if let Some(d) = self.cache.get(ctx.board()) {
                return Ok(*d);
            }
        }
        let decision = self
            .policy
            .decide(ctx)
            .map_err(|source| VerifyError::Policy {
                policy: self.policy.name(),
                transcript: self.path.to_transcript(),
                source,
            })?;
        if self.policy.board_only() {
            self.cache.insert(*ctx.board(), decision);
        }
        Ok(decision)
    }

    fn walk(&mut self, ctx: &GameContext) -> Result<(), VerifyError> {
        let outcome = ctx.board().outcome();
        if outcome.is_terminal() {
            self.leaf(ctx.bot_mark(), outcome);
            return Ok(());
        }
        let mover = ctx.board().to_move();
        if ctx.is_bot_turn() {
            let decision = self.decide(ctx)?;
            for cell in decision.candidates() {
                self.report.branch_nodes += 1;
                let next = ctx.play(cell).map_err(|_| VerifyError::Illegal {
                    policy: self.policy.name(),
                    cell,
                    transcript: self.path.to_transcript(),
                })?;
                self.descend(&next, mover, cell, decision.reason())?;
            }
        } else {
            for cell in ctx.board().empty_cells() {
                let next = ctx.play(cell)?;
                self.descend(&next, mover, cell, Reason::Any)?;
            }
        }
        Ok(())
    }

    fn descend(
        &mut self,
        next: &GameContext,
        mover: Mark,
        cell: Cell,
        reason: Reason,
    ) -> Result<(), VerifyError> {
        self.path.push(mover, cell, reason);
        let result = self.walk(next);
        self.path.plies.pop();
        result
    }

    fn leaf(&mut self, bot: Mark, outcome: Outcome) {
        self.report.games += 1;
        match outcome.winner() {
            None => self.report.draws += 1,
            Some(m) if m == bot => self.report.wins += 1,
            Some(_) => {
                self.report.loss_count += 1;
                if self.report.losses.len() < MAX_STORED_LOSSES {
                    let mut record = self.path.clone();
                    record.outcome = outcome;
                    self.report.losses.push(record.to_transcript());
                }
            }
        }
    }
}

/// A won position where plain minimax takes longer to win than the
/// depth-aware search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimalityCase {
    #[serde(with = "board_text")]
    pub board: Board,
    pub mm_cell: Cell,
    pub aba_cell: Cell,
    pub plies_to_win_mm: usize,
    pub plies_to_win_aba: usize,
}

mod board_text {
    use super::Board;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(board: &Board, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(board)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Board, D::Error> {
        let s = String::deserialize(d)?;
        Board::parse(&s).map_err(serde::de::Error::custom)
    }
}

type SearchFn = fn(&Board, Mark) -> Result<SearchResult, PolicyError>;

struct SelfPlay {
    search: SearchFn,
    cache: HashMap<Board, SearchResult>,
}

impl SelfPlay {
    fn new(search: SearchFn) -> SelfPlay {
        SelfPlay {
            search,
            cache: HashMap::new(),
        }
    }

    fn best(&mut self, board: &Board) -> SearchResult {
        if let Some(r) = self.cache.get(board) {
            return *r;
        }
        let r = (self.search)(board, board.to_move()).expect("ongoing position");
        self.cache.insert(*board, r);
        r
    }

    /// Plies until the game ends when both sides use this search.
    fn plies_to_end(&mut self, mut board: Board) -> usize {
        let mut plies = 0;
        while !board.outcome().is_terminal() {
            board = board.place_unchecked(self.best(&board).cell);
            plies += 1;
        }
        plies
    }
}

/// Scans every reachable position (either side opening) that the mover
/// has won, and lists those where MM's choice wins strictly later than
/// ABA's. Both continuations are MM self-play, so only the chosen cell
/// differs.
pub fn optimality_scan() -> Vec<OptimalityCase> {
    let mut mm = SelfPlay::new(mm_move);
    let mut aba = SelfPlay::new(aba_move);
    let mut cases = Vec::new();
    for first in [Mark::X, Mark::O] {
        for board in reachable_positions(first) {
            if board.outcome().is_terminal() {
                continue;
            }
            let mm_best = mm.best(&board);
            if mm_best.score.0 <= 0 {
                continue;
            }
            let aba_best = aba.best(&board);
            if aba_best.cell == mm_best.cell {
                continue;
            }
            let plies_mm = 1 + mm.plies_to_end(board.place_unchecked(mm_best.cell));
            let plies_aba = 1 + mm.plies_to_end(board.place_unchecked(aba_best.cell));
            if plies_mm > plies_aba {
                cases.push(OptimalityCase {
                    board,
                    mm_cell: mm_best.cell,
                    aba_cell: aba_best.cell,
                    plies_to_win_mm: plies_mm,
                    plies_to_win_aba: plies_aba,
                });
            }
        }
    }
    cases
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimax::{SearchAlgorithm, SearchPolicy};
    use crate::policy::UniformRandom;

    #[test]
    fn five_ply_games_match_the_combinatorial_count() {
        // X's three cells form one of 8 lines, played in any of 3! orders;
        // O's two cells are any ordered pair of the remaining six.
        let oracle = 8 * 6 * (6 * 5);
        let census = enumerate_games();
        assert_eq!(census.games_by_length[&5], oracle);
        assert_eq!(
            census.games_by_length.values().sum::<u64>(),
            census.total_games
        );
        assert_eq!(
            census.x_wins + census.o_wins + census.draws,
            census.total_games
        );
    }

    #[test]
    fn parallel_enumeration_agrees() {
        assert_eq!(enumerate_games(), enumerate_games_parallel());
    }

    #[test]
    fn reachable_position_count() {
        // the standard count of legal positions with X first
        assert_eq!(reachable_positions(Mark::X).len(), 5478);
    }

    #[test]
    fn random_policy_loses_as_second_player() {
        let report = verify_no_loss(&UniformRandom, Role::Second).unwrap();
        assert!(report.loss_count > 0);
        assert_eq!(report.losses.len(), MAX_STORED_LOSSES);
        let first = GameRecord::parse_transcript(&report.losses[0]).unwrap();
        assert_eq!(first.outcome, Outcome::OWin);
        // branching over every move of both sides is the whole game tree
        assert_eq!(report.games, 255_168);
    }

    #[test]
    fn opening_outside_the_support_is_rejected() {
        let aba = SearchPolicy(SearchAlgorithm::AlphaBetaDepth);
        let best = aba_move(&Board::new(Mark::X), Mark::X).unwrap().cell;
        let other = Cell::ALL.into_iter().find(|&c| c != best).unwrap();
        assert!(matches!(
            verify_opening(&aba, true, &[other]),
            Err(VerifyError::OffPolicy { .. })
        ));
    }
}
