//! Tic-tac-toe with a randomized rule-based policy (T3DT) that never loses,
//! full-tree search baselines, exhaustive verification and self-play timing.

pub mod bench;
pub mod board;
pub mod game;
pub mod minimax;
pub mod policy;
pub mod t3dt;
pub mod verify;

pub use bench::{Algorithm, BenchConfig, BenchError, MetricsReport, TimingMatrix};
pub use board::{Board, BoardError, Cell, CellClass, CellSet, Mark, Outcome, Symmetry};
pub use game::{play_game, GameRecord, PlayError, PlyRecord, Seat, TranscriptError};
pub use minimax::{SearchAlgorithm, SearchPolicy, SearchResult};
pub use policy::{
    Decision, FirstFree, GameContext, Policy, PolicyError, PolicyMode, Reason, RuleId,
    UniformRandom,
};
pub use t3dt::T3dt;
pub use verify::{EnumerationCensus, Role, VerificationReport, VerifyError};
