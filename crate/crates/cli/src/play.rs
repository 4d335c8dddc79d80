//! Interactive terminal game. Generic over the streams so tests can script
//! a whole game.

use std::io::{self, BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tictac_core::{Cell, GameContext, Mark, Outcome, Policy, PolicyMode, Seat, T3dt};

pub const BOT: Mark = Mark::X;
pub const HUMAN: Mark = Mark::O;

/// Parses `row col` (1-based, separated by whitespace or a comma).
pub fn parse_cell(line: &str) -> Result<Cell, String> {
    let parts: Vec<&str> = line
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|p| !p.is_empty())
        .collect();
    let [r, c] = parts[..] else {
        return Err("enter a row and a column, e.g. `2 3`".into());
    };
    let (Ok(r), Ok(c)) = (r.parse::<usize>(), c.parse::<usize>()) else {
        return Err("row and column must be numbers from 1 to 3".into());
    };
    Cell::from_row_col(r, c).map_err(|_| "row and column must be numbers from 1 to 3".to_string())
}

/// Plays one game on `input`/`output`. Returns `None` if input ends early.
pub fn run<R: BufRead, W: Write>(
    mut input: R,
    mut out: W,
    first: Seat,
    seed: u64,
    mode: PolicyMode,
) -> io::Result<Option<Outcome>> {
    let bot = T3dt::new(mode);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ctx = GameContext::new(BOT, first == Seat::Bot);
    writeln!(
        out,
        "You are {HUMAN}, the bot is {BOT} ({mode} mode, seed {seed})."
    )?;
    let mut line = String::new();
    while !ctx.board().outcome().is_terminal() {
        if ctx.is_bot_turn() {
            let (cell, reason) = bot
                .choose(&ctx, &mut rng)
                .map_err(|e| io::Error::other(e.to_string()))?;
            ctx = ctx
                .play(cell)
                .map_err(|e| io::Error::other(e.to_string()))?;
            writeln!(out, "Bot plays {cell} [{reason}]")?;
            continue;
        }
        write!(out, "\n{}Your move (row col): ", ctx.board().pretty())?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            return Ok(None);
        }
        match parse_cell(&line).and_then(|cell| ctx.play(cell).map_err(|e| e.to_string())) {
            Ok(next) => ctx = next,
            Err(msg) => writeln!(out, "Rejected: {msg}")?,
        }
    }
    let outcome = ctx.board().outcome();
    let verdict = match outcome.winner() {
        Some(BOT) => "The bot wins.",
        Some(_) => "You win.",
        None => "Draw.",
    };
    writeln!(out, "\n{}{verdict}", ctx.board().pretty())?;
    Ok(Some(outcome))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_row_col() {
        assert_eq!(parse_cell("1 1").unwrap(), Cell::new(0).unwrap());
        assert_eq!(parse_cell(" 3,2\n").unwrap(), Cell::new(7).unwrap());
        assert!(parse_cell("4 1").is_err());
        assert!(parse_cell("a b").is_err());
        assert!(parse_cell("2").is_err());
    }
}
