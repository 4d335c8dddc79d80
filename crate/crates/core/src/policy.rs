//! The contract every move-selection algorithm implements: a
//! [`GameContext`] in, a weighted [`Decision`] out.
//!
//! Decisions expose their whole support so the verifier can branch over every
//! move a randomized policy might make instead of sampling.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Board, BoardError, Cell, CellSet, Mark, Symmetry};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("the game is already over")]
    Terminal,
    #[error("it is not {0}'s turn")]
    NotOurTurn(Mark),
    #[error(transparent)]
    Board(#[from] BoardError),
}

/// Identifies the decision-tree branch (or endgame priority) behind a move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    FirstRandom,
    CornerEdge,
    CornerCorner,
    CornerCentre,
    EdgeCorner,
    EdgeNearEdge,
    EdgeOppEdge,
    EdgeCentre,
    CentreEdge,
    CentreCorner,
    OppCorner,
    OppCornerCorner,
    OppCornerEdge,
    OppEdge,
    OppCentre,
    Win,
    Block,
    ForkMake,
    ForkBlock,
    RandomFill,
}

impl RuleId {
    pub const ALL: [RuleId; 20] = [
        RuleId::FirstRandom,
        RuleId::CornerEdge,
        RuleId::CornerCorner,
        RuleId::CornerCentre,
        RuleId::EdgeCorner,
        RuleId::EdgeNearEdge,
        RuleId::EdgeOppEdge,
        RuleId::EdgeCentre,
        RuleId::CentreEdge,
        RuleId::CentreCorner,
        RuleId::OppCorner,
        RuleId::OppCornerCorner,
        RuleId::OppCornerEdge,
        RuleId::OppEdge,
        RuleId::OppCentre,
        RuleId::Win,
        RuleId::Block,
        RuleId::ForkMake,
        RuleId::ForkBlock,
        RuleId::RandomFill,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::FirstRandom => "FIRST_RANDOM",
            RuleId::CornerEdge => "C-EDGE",
            RuleId::CornerCorner => "C-CORNER",
            RuleId::CornerCentre => "C-CENTRE",
            RuleId::EdgeCorner => "E-CORNER",
            RuleId::EdgeNearEdge => "E-NEAR-EDGE",
            RuleId::EdgeOppEdge => "E-OPP-EDGE",
            RuleId::EdgeCentre => "E-CENTRE",
            RuleId::CentreEdge => "M-EDGE",
            RuleId::CentreCorner => "M-CORNER",
            RuleId::OppCorner => "O-CORNER",
            RuleId::OppCornerCorner => "O-CORNER-CORNER",
            RuleId::OppCornerEdge => "O-CORNER-EDGE",
            RuleId::OppEdge => "O-EDGE",
            RuleId::OppCentre => "O-CENTRE",
            RuleId::Win => "WIN",
            RuleId::Block => "BLOCK",
            RuleId::ForkMake => "FORK-MAKE",
            RuleId::ForkBlock => "FORK-BLOCK",
            RuleId::RandomFill => "RANDOM-FILL",
        }
    }

    /// True for the opening-tree branches, false for the endgame priorities.
    pub fn is_tree_rule(self) -> bool {
        !matches!(
            self,
            RuleId::Win | RuleId::Block | RuleId::ForkMake | RuleId::ForkBlock | RuleId::RandomFill
        )
    }

    /// One-line human explanation, shown next to bot moves.
    pub fn describe(self) -> &'static str {
        match self {
            RuleId::FirstRandom => "random opening: centre/corner/edge",
            RuleId::CornerEdge => "corner opening met by an edge: centre, then an empty-V fork",
            RuleId::CornerCorner => "corner opening met by a corner: take corners until a fork",
            RuleId::CornerCentre => "corner opening met by the centre: diagonally opposite corner",
            RuleId::EdgeCorner => "edge opening met by a corner: centre, then an empty edge",
            RuleId::EdgeNearEdge => {
                "edge opening met by a neighbouring edge: shared corner, then centre"
            }
            RuleId::EdgeOppEdge => {
                "edge opening met by the opposite edge: adjacent corner, then the closest corner"
            }
            RuleId::EdgeCentre => "edge opening met by the centre: a corner next to the first move",
            RuleId::CentreEdge => "centre opening met by an edge: any corner, then an empty-V fork",
            RuleId::CentreCorner => {
                "centre opening met by a corner: the diagonally opposite corner"
            }
            RuleId::OppCorner => "took centre against your corner opening",
            RuleId::OppCornerCorner => "you hold opposite corners: took an edge",
            RuleId::OppCornerEdge => "took the corner closest to both your marks",
            RuleId::OppEdge => "took a corner next to your edge opening, then the centre",
            RuleId::OppCentre => "took a corner against your centre opening",
            RuleId::Win => "completed a line",
            RuleId::Block => "blocked your two-in-a-row",
            RuleId::ForkMake => "made a fork",
            RuleId::ForkBlock => "stopped your fork",
            RuleId::RandomFill => "no threats left: random empty cell",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| BoardError::Parse(format!("unknown rule {s:?}")))
    }
}

/// Why a move was made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reason {
    Rule(RuleId),
    Search(&'static str),
    Uniform,
    Human,
    /// An exhaustively enumerated opponent move.
    Any,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::Rule(rule) => f.write_str(rule.as_str()),
            Reason::Search(name) => f.write_str(name),
            Reason::Uniform => f.write_str("UNIFORM"),
            Reason::Human => f.write_str("HUMAN"),
            Reason::Any => f.write_str("ANY"),
        }
    }
}

impl FromStr for Reason {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "MM" => Ok(Reason::Search("MM")),
            "ABP" => Ok(Reason::Search("ABP")),
            "ABA" => Ok(Reason::Search("ABA")),
            "UNIFORM" => Ok(Reason::Uniform),
            "HUMAN" => Ok(Reason::Human),
            "ANY" => Ok(Reason::Any),
            other => other.parse().map(Reason::Rule),
        }
    }
}

impl Serialize for Reason {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Reason {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyMode {
    /// Win, block, opening tree, then random fill.
    Strict,
    /// Strict plus fork making and fork blocking before the random fill.
    #[default]
    Safe,
}

impl fmt::Display for PolicyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyMode::Strict => "strict",
            PolicyMode::Safe => "safe",
        })
    }
}

impl FromStr for PolicyMode {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "strict" => Ok(PolicyMode::Strict),
            "safe" => Ok(PolicyMode::Safe),
            other => Err(BoardError::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// A game as seen by one player: the board, the move order that produced
/// it, and which mark this player holds.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GameContext {
    board: Board,
    bot_mark: Mark,
    moves: [Cell; 9],
    len: u8,
}

impl GameContext {
    pub fn new(bot_mark: Mark, bot_started: bool) -> GameContext {
        let first = if bot_started {
            bot_mark
        } else {
            bot_mark.opponent()
        };
        GameContext {
            board: Board::new(first),
            bot_mark,
            moves: [Cell::CENTRE; 9],
            len: 0,
        }
    }

    /// Replays `moves` from the empty board.
    pub fn from_moves(
        bot_mark: Mark,
        bot_started: bool,
        moves: &[Cell],
    ) -> Result<GameContext, BoardError> {
        let mut ctx = GameContext::new(bot_mark, bot_started);
        for &cell in moves {
            ctx = ctx.play(cell)?;
        }
        Ok(ctx)
    }

    pub fn board(&self) -> &Board {
        &self.board
    }

    pub fn bot_mark(&self) -> Mark {
        self.bot_mark
    }

    pub fn bot_started(&self) -> bool {
        self.board.first_mover() == self.bot_mark
    }

    pub fn is_bot_turn(&self) -> bool {
        self.board.to_move() == self.bot_mark
    }

    /// Cells in the order they were played.
    pub fn moves(&self) -> &[Cell] {
        &self.moves[..self.len as usize]
    }

    pub fn history(&self) -> impl Iterator<Item = (Cell, Mark)> + '_ {
        let first = self.board.first_mover();
        self.moves().iter().enumerate().map(move |(i, &c)| {
            let mark = if i % 2 == 0 { first } else { first.opponent() };
            (c, mark)
        })
    }

    /// Plays the side-to-move's mark on `cell`.
    pub fn play(&self, cell: Cell) -> Result<GameContext, BoardError> {
        let board = self.board.place(cell)?;
        let mut next = *self;
        next.board = board;
        next.moves[self.len as usize] = cell;
        next.len += 1;
        Ok(next)
    }

    /// The same game seen by the holder of `mark`.
    pub fn for_mark(&self, mark: Mark) -> GameContext {
        GameContext {
            bot_mark: mark,
            ..*self
        }
    }

    pub fn transform(&self, sym: Symmetry) -> GameContext {
        let mut moves = self.moves;
        for m in moves.iter_mut().take(self.len as usize) {
            *m = sym.apply(*m);
        }
        GameContext {
            board: self.board.transform(sym),
            bot_mark: self.bot_mark,
            moves,
            len: self.len,
        }
    }
}

impl fmt::Debug for GameContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let moves: Vec<usize> = self.moves().iter().map(|c| c.index()).collect();
        write!(
            f,
            "GameContext({}, bot={}, moves={moves:?})",
            self.board, self.bot_mark
        )
    }
}

/// A policy's output: the cells it may play, their probabilities, and why.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    support: CellSet,
    weights: [f64; 9],
    reason: Reason,
}

impl Decision {
    /// Uniform over a non-empty set.
    pub fn uniform(support: CellSet, reason: Reason) -> Decision {
        assert!(
            !support.is_empty(),
            "a decision needs at least one candidate"
        );
        let p = 1.0 / support.len() as f64;
        let mut weights = [0.0; 9];
        for c in support {
            weights[c.index()] = p;
        }
        Decision {
            support,
            weights,
            reason,
        }
    }

    pub fn single(cell: Cell, reason: Reason) -> Decision {
        Decision::uniform(std::iter::once(cell).collect(), reason)
    }

    /// Explicit weights; normalised, zero entries dropped from the support.
    pub fn weighted(weights: [f64; 9], reason: Reason) -> Decision {
        let total: f64 = weights.iter().sum();
        assert!(total > 0.0, "weights must not all be zero");
        let mut support = CellSet::EMPTY;
        let mut normalised = [0.0; 9];
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                support.insert(Cell::ALL[i]);
                normalised[i] = w / total;
            }
        }
        Decision {
            support,
            weights: normalised,
            reason,
        }
    }

    pub fn candidates(&self) -> CellSet {
        self.support
    }

    pub fn weight(&self, cell: Cell) -> f64 {
        self.weights[cell.index()]
    }

    pub fn reason(&self) -> Reason {
        self.reason
    }

    pub fn rule(&self) -> Option<RuleId> {
        match self.reason {
            Reason::Rule(rule) => Some(rule),
            _ => None,
        }
    }

    /// Draws one candidate according to the weights.
    pub fn sample(&self, rng: &mut dyn RngCore) -> Cell {
        if self.support.len() == 1 {
            return self.support.iter().next().unwrap();
        }
        let mut u: f64 = rng.gen();
        let mut last = Cell::CENTRE;
        for cell in self.support {
            u -= self.weights[cell.index()];
            if u < 0.0 {
                return cell;
            }
            last = cell;
        }
        last
    }

    pub fn transform(&self, sym: Symmetry) -> Decision {
        let mut weights = [0.0; 9];
        for cell in self.support {
            weights[sym.apply(cell).index()] = self.weights[cell.index()];
        }
        Decision {
            support: sym.apply_set(self.support),
            weights,
            reason: self.reason,
        }
    }
}

/// Anything that can pick moves for one side of a game.
pub trait Policy: Send + Sync {
    fn name(&self) -> String;

    /// The full weighted support of the next move. Pure in `ctx`.
    fn decide(&self, ctx: &GameContext) -> Result<Decision, PolicyError>;

    /// True when `decide` depends on the board alone, not on move order.
    fn board_only(&self) -> bool {
        false
    }

    fn mode(&self) -> Option<PolicyMode> {
        None
    }

    fn choose(
        &self,
        ctx: &GameContext,
        rng: &mut dyn RngCore,
    ) -> Result<(Cell, Reason), PolicyError> {
        let decision = self.decide(ctx)?;
        Ok((decision.sample(rng), decision.reason()))
    }
}

pub(crate) fn check_turn(ctx: &GameContext) -> Result<(), PolicyError> {
    if ctx.board().outcome().is_terminal() {
        return Err(PolicyError::Terminal);
    }
    if !ctx.is_bot_turn() {
        return Err(PolicyError::NotOurTurn(ctx.bot_mark()));
    }
    Ok(())
}

/// Plays any empty cell with equal probability.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformRandom;

impl Policy for UniformRandom {
    fn name(&self) -> String {
        "random".into()
    }

    fn decide(&self, ctx: &GameContext) -> Result<Decision, PolicyError> {
        check_turn(ctx)?;
        Ok(Decision::uniform(
            ctx.board().empty_cells(),
            Reason::Uniform,
        ))
    }

    fn board_only(&self) -> bool {
        true
    }
}

/// Always plays the lowest-index empty cell. Costs next to nothing, which
/// makes it a baseline for clock overhead.
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstFree;

impl Policy for FirstFree {
    fn name(&self) -> String {
        "first-free".into()
    }

    fn decide(&self, ctx: &GameContext) -> Result<Decision, PolicyError> {
        check_turn(ctx)?;
        let cell = ctx
            .board()
            .empty_cells()
            .iter()
            .next()
            .ok_or(PolicyError::Terminal)?;
        Ok(Decision::single(cell, Reason::Uniform))
    }

    fn board_only(&self) -> bool {
        true
    }
}
