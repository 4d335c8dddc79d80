//! Playing full games between two policies and the line-oriented transcript
//! format.
//!
//! ```text
//! 1 X 4 FIRST_RANDOM
//! 2 O 0 UNIFORM
//! ...
//! RESULT Draw
//! ```

use std::fmt::Write as _;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Board, BoardError, Cell, Mark, Outcome};
use crate::policy::{GameContext, Policy, PolicyError, Reason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Seat {
    Bot,
    Opponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlyRecord {
    pub ply: usize,
    pub mark: Mark,
    pub cell: Cell,
    pub reason: Reason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub plies: Vec<PlyRecord>,
    pub outcome: Outcome,
}

#[derive(Debug, Error)]
pub enum PlayError {
    #[error("{policy} played illegal cell {cell}: {source}\n{transcript}")]
    Illegal {
        policy: String,
        cell: Cell,
        source: BoardError,
        transcript: String,
    },
    #[error("{policy} failed: {source}")]
    Policy { policy: String, source: PolicyError },
}

#[derive(Debug, Error, PartialEq)]
pub enum TranscriptError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("transcript does not replay: {0}")]
    Replay(#[from] BoardError),
    #[error("claimed result {claimed} but the moves give {actual}")]
    WrongResult { claimed: Outcome, actual: Outcome },
}

impl GameRecord {
    pub fn new() -> GameRecord {
        GameRecord {
            plies: Vec::new(),
            outcome: Outcome::Ongoing,
        }
    }

    pub fn push(&mut self, mark: Mark, cell: Cell, reason: Reason) {
        let ply = self.plies.len() + 1;
        self.plies.push(PlyRecord {
            ply,
            mark,
            cell,
            reason,
        });
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.plies.iter().map(|p| p.cell).collect()
    }

    pub fn first_mover(&self) -> Mark {
        self.plies.first().map_or(Mark::X, |p| p.mark)
    }

    /// Replays the moves through the board and returns the final position.
    pub fn replay(&self) -> Result<Board, BoardError> {
        let mut board = Board::new(self.first_mover());
        for p in &self.plies {
            if board.to_move() != p.mark {
                return Err(BoardError::Parse(format!(
                    "ply {} has the wrong mark",
                    p.ply
                )));
            }
            board = board.place(p.cell)?;
        }
        Ok(board)
    }

    pub fn to_transcript(&self) -> String {
        let mut out = String::new();
        for p in &self.plies {
            let _ = writeln!(out, "{} {} {} {}", p.ply, p.mark, p.cell.index(), p.reason);
        }
        let _ = writeln!(out, "RESULT {}", self.outcome);
        out
    }

    /// Parses a transcript and checks it replays to the stated result.
    pub fn parse_transcript(text: &str) -> Result<GameRecord, TranscriptError> {
        let mut record = GameRecord::new();
        let mut result = None;
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let line_no = i + 1;
            let bad = |msg: &str| TranscriptError::Malformed {
                line: line_no,
                msg: msg.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.first() == Some(&"RESULT") {
                let outcome = fields
                    .get(1)
                    .ok_or_else(|| bad("missing outcome"))?
                    .parse::<Outcome>()
                    .map_err(|e| bad(&e.to_string()))?;
                result = Some(outcome);
                continue;
            }
            if result.is_some() {
                return Err(bad("moves after RESULT"));
            }
            let [ply, mark, cell, reason] = fields[..] else {
                return Err(bad("expected `<ply> <mark> <cell> <rule>`"));
            };
            let ply: usize = ply.parse().map_err(|_| bad("bad ply number"))?;
            if ply != record.plies.len() + 1 {
                return Err(bad("plies out of order"));
            }
            let mark: Mark = mark.parse().map_err(|e: BoardError| bad(&e.to_string()))?;
            let cell = cell
                .parse::<usize>()
                .map_err(|_| bad("bad cell"))
                .and_then(|i| Cell::new(i).map_err(|e| bad(&e.to_string())))?;
            let reason: Reason = reason
                .parse()
                .map_err(|e: BoardError| bad(&e.to_string()))?;
            record.push(mark, cell, reason);
        }
        let claimed = result.ok_or(TranscriptError::Malformed {
            line: text.lines().count(),
            msg: "missing RESULT line".into(),
        })?;
        let actual = record.replay()?.outcome();
        if actual != claimed {
            return Err(TranscriptError::WrongResult { claimed, actual });
        }
        record.outcome = claimed;
        Ok(record)
    }
}

impl Default for GameRecord {
    fn default() -> Self {
        GameRecord::new()
    }
}

/// Plays one game from the empty board. The bot holds X; `first` decides
/// who opens. Each policy sees the game from its own side.
pub fn play_game(
    bot: &dyn Policy,
    opponent: &dyn Policy,
    first: Seat,
    rng: &mut dyn RngCore,
) -> Result<GameRecord, PlayError> {
    let bot_mark = Mark::X;
    let mut ctx = GameContext::new(bot_mark, first == Seat::Bot);
    let mut record = GameRecord::new();
    while !ctx.board().outcome().is_terminal() {
        let mover = ctx.board().to_move();
        let policy = if mover == bot_mark { bot } else { opponent };
        let view = ctx.for_mark(mover);
        let (cell, reason) = policy
            .choose(&view, rng)
            .map_err(|source| PlayError::Policy {
                policy: policy.name(),
                source,
            })?;
        ctx = match ctx.play(cell) {
            Ok(next) => next,
            Err(source) => {
                return Err(PlayError::Illegal {
                    policy: policy.name(),
                    cell,
                    source,
                    transcript: record.to_transcript(),
                })
            }
        };
        record.push(mover, cell, reason);
    }
    record.outcome = ctx.board().outcome();
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{Decision, UniformRandom};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Stubborn;

    impl Policy for Stubborn {
        fn name(&self) -> String {
            "stubborn".into()
        }

        fn decide(&self, _ctx: &GameContext) -> Result<Decision, PolicyError> {
            Ok(Decision::single(Cell::CENTRE, Reason::Uniform))
        }
    }

    #[test]
    fn transcript_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let record = play_game(&UniformRandom, &UniformRandom, Seat::Bot, &mut rng).unwrap();
        let text = record.to_transcript();
        assert!(text.ends_with(&format!("RESULT {}\n", record.outcome)));
        assert_eq!(GameRecord::parse_transcript(&text).unwrap(), record);
    }

    #[test]
    fn transcript_with_a_false_result_is_rejected() {
        let text = "1 X 0 UNIFORM\n2 O 4 UNIFORM\nRESULT XWin\n";
        assert!(matches!(
            GameRecord::parse_transcript(text),
            Err(TranscriptError::WrongResult { .. })
        ));
        assert!(GameRecord::parse_transcript("1 X 0\nRESULT Ongoing\n").is_err());
        assert!(GameRecord::parse_transcript("1 X 0 UNIFORM\n").is_err());
    }

    #[test]
    fn illegal_moves_abort_with_a_transcript() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = play_game(&Stubborn, &Stubborn, Seat::Bot, &mut rng).unwrap_err();
        match err {
            PlayError::Illegal {
                transcript, cell, ..
            } => {
                assert_eq!(cell, Cell::CENTRE);
                assert!(transcript.starts_with("1 X 4 UNIFORM"));
            }
            other => panic!("unexpected {other}"),
        }
    }
}
