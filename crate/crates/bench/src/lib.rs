//! Positions shared by the decision-latency benchmarks.

use tictac_core::{Cell, GameContext, Mark};

/// A named game prefix, bot holding X.
pub struct Fixture {
    pub name: &'static str,
    pub bot_started: bool,
    pub moves: &'static [usize],
}

impl Fixture {
    pub fn context(&self) -> GameContext {
        let cells: Vec<Cell> = self
            .moves
            .iter()
            .map(|&i| Cell::new(i).expect("fixture cell"))
            .collect();
        GameContext::from_moves(Mark::X, self.bot_started, &cells).expect("fixture replays")
    }
}

/// One position per move number, from the empty board to the last free cell.
pub const FIXTURES: [Fixture; 6] = [
    Fixture {
        name: "ply1_empty",
        bot_started: true,
        moves: &[],
    },
    Fixture {
        name: "ply2_corner_opening",
        bot_started: false,
        moves: &[0],
    },
    Fixture {
        name: "ply3_corner_edge",
        bot_started: true,
        moves: &[0, 5],
    },
    Fixture {
        name: "ply5_fork",
        bot_started: true,
        moves: &[0, 5, 4, 8],
    },
    Fixture {
        name: "ply6_win_available",
        bot_started: false,
        moves: &[0, 2, 1, 4, 7],
    },
    Fixture {
        name: "ply9_last_cell",
        bot_started: true,
        moves: &[4, 0, 2, 6, 3, 5, 1, 7],
    },
];
