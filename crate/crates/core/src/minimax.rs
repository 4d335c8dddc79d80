//! Search baselines: plain minimax (MM), alpha-beta (ABP) and depth-aware
//! alpha-beta (ABA).
//!
//! All three are negamax over the full game tree with children visited in
//! cell-index order. Ties go to the lowest index. MM and ABP score a finished
//! game +1/0/-1 for the side that moved into it; ABA scores a win `K - d`
//! where `d` is the number of plies from the root, so faster wins and slower
//! losses rank higher.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::board::{Board, BoardError, Cell, Mark};
use crate::policy::{check_turn, Decision, GameContext, Policy, PolicyError, Reason};

/// Win score for ABA. Games last at most 9 plies, so `K - d` stays positive.
pub const WIN_SCORE: i32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SearchScore(pub i32);

impl SearchScore {
    pub fn signum(self) -> i32 {
        self.0.signum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_visited: u64,
    pub max_depth: u32,
}

impl SearchStats {
    #[inline]
    fn visit(&mut self, depth: u32) {
        self.nodes_visited += 1;
        if depth > self.max_depth {
            self.max_depth = depth;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchResult {
    pub cell: Cell,
    pub score: SearchScore,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SearchAlgorithm {
    #[serde(rename = "MM")]
    Minimax,
    #[serde(rename = "ABP")]
    AlphaBeta,
    #[serde(rename = "ABA")]
    AlphaBetaDepth,
}

impl SearchAlgorithm {
    pub fn label(self) -> &'static str {
        match self {
            SearchAlgorithm::Minimax => "MM",
            SearchAlgorithm::AlphaBeta => "ABP",
            SearchAlgorithm::AlphaBetaDepth => "ABA",
        }
    }

    pub fn search(self, board: &Board, mark: Mark) -> Result<SearchResult, PolicyError> {
        match self {
            SearchAlgorithm::Minimax => mm_move(board, mark),
            SearchAlgorithm::AlphaBeta => abp_move(board, mark),
            SearchAlgorithm::AlphaBetaDepth => aba_move(board, mark),
        }
    }
}

impl fmt::Display for SearchAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SearchAlgorithm {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mm" => Ok(SearchAlgorithm::Minimax),
            "abp" => Ok(SearchAlgorithm::AlphaBeta),
            "aba" => Ok(SearchAlgorithm::AlphaBetaDepth),
            other => Err(BoardError::Parse(format!(
                "unknown search algorithm {other:?}"
            ))),
        }
    }
}

fn check(board: &Board, mark: Mark) -> Result<(), PolicyError> {
    if board.outcome().is_terminal() {
        return Err(PolicyError::Terminal);
    }
    if board.to_move() != mark {
        return Err(PolicyError::NotOurTurn(mark));
    }
    Ok(())
}

pub fn mm_move(board: &Board, mark: Mark) -> Result<SearchResult, PolicyError> {
    check(board, mark)?;
    let mut stats = SearchStats::default();
    stats.visit(0);
    let mut best: Option<(Cell, i32)> = None;
    for cell in board.empty_cells() {
        let value = -minimax(&board.place_unchecked(cell), 1, &mut stats);
        if best.is_none_or(|(_, b)| value > b) {
            best = Some((cell, value));
        }
    }
    let (cell, value) = best.expect("ongoing board has an empty cell");
    Ok(SearchResult {
        cell,
        score: SearchScore(value),
        stats,
    })
}

/// Value for the side to move.
fn minimax(board: &Board, depth: u32, stats: &mut SearchStats) -> i32 {
    stats.visit(depth);
    let last = board.to_move().opponent();
    if board.has_line(last) {
        return -1;
    }
    let free = board.empty_cells();
    if free.is_empty() {
        return 0;
    }
    let mut best = i32::MIN;
    for cell in free {
        best = best.max(-minimax(&board.place_unchecked(cell), depth + 1, stats));
    }
    best
}

pub fn abp_move(board: &Board, mark: Mark) -> Result<SearchResult, PolicyError> {
    check(board, mark)?;
    root_alpha_beta(board, Terminal::Flat)
}

pub fn aba_move(board: &Board, mark: Mark) -> Result<SearchResult, PolicyError> {
    check(board, mark)?;
    root_alpha_beta(board, Terminal::DepthAware)
}

#[derive(Clone, Copy)]
enum Terminal {
    Flat,
    DepthAware,
}

impl Terminal {
    /// Score of a lost position for the side to move.
    #[inline]
    fn loss(self, depth: u32) -> i32 {
        match self {
            Terminal::Flat => -1,
            Terminal::DepthAware => -(WIN_SCORE - depth as i32),
        }
    }

    fn bound(self) -> i32 {
        match self {
            Terminal::Flat => 2,
            Terminal::DepthAware => WIN_SCORE + 1,
        }
    }
}

fn root_alpha_beta(board: &Board, scoring: Terminal) -> Result<SearchResult, PolicyError> {
    let mut stats = SearchStats::default();
    stats.visit(0);
    let beta = scoring.bound();
    let mut alpha = -beta;
    let mut best: Option<(Cell, i32)> = None;
    for cell in board.empty_cells() {
        let value = -alpha_beta(
            &board.place_unchecked(cell),
            1,
            -beta,
            -alpha,
            scoring,
            &mut stats,
        );
        // children that fail low return an upper bound no better than
        // `alpha`, so they never displace an earlier, lower-index move
        if best.is_none_or(|(_, b)| value > b) {
            best = Some((cell, value));
        }
        alpha = alpha.max(value);
    }
    let (cell, value) = best.expect("ongoing board has an empty cell");
    Ok(SearchResult {
        cell,
        score: SearchScore(value),
        stats,
    })
}

fn alpha_beta(
    board: &Board,
    depth: u32,
    mut alpha: i32,
    beta: i32,
    scoring: Terminal,
    stats: &mut SearchStats,
) -> i32 {
    stats.visit(depth);
    let last = board.to_move().opponent();
    if board.has_line(last) {
        return scoring.loss(depth);
    }
    let free = board.empty_cells();
    if free.is_empty() {
        return 0;
    }
    let mut best = i32::MIN;
    for cell in free {
        let value = -alpha_beta(
            &board.place_unchecked(cell),
            depth + 1,
            -beta,
            -alpha,
            scoring,
            stats,
        );
        best = best.max(value);
        alpha = alpha.max(value);
        if alpha >= beta {
            break;
        }
    }
    best
}

/// One of the search baselines wrapped as a [`Policy`].
#[derive(Debug, Clone, Copy)]
pub struct SearchPolicy(pub SearchAlgorithm);

impl Policy for SearchPolicy {
    fn name(&self) -> String {
        self.0.label().to_ascii_lowercase()
    }

    fn decide(&self, ctx: &GameContext) -> Result<Decision, PolicyError> {
        check_turn(ctx)?;
        let result = self.0.search(ctx.board(), ctx.bot_mark())?;
        Ok(Decision::single(
            result.cell,
            Reason::Search(self.0.label()),
        ))
    }

    fn board_only(&self) -> bool {
        true
    }
}
