#![allow(dead_code)]

use tictac_core::{Cell, GameContext, Mark, Policy, PolicyMode, T3dt};

pub fn c(i: usize) -> Cell {
    Cell::new(i).unwrap()
}

pub fn cells(ix: &[usize]) -> Vec<Cell> {
    ix.iter().map(|&i| c(i)).collect()
}

/// Every ongoing bot-turn context over all move sequences, bot holding X.
pub fn all_bot_contexts(bot_started: bool) -> Vec<GameContext> {
    let mut out = Vec::new();
    fn rec(ctx: GameContext, out: &mut Vec<GameContext>) {
        if ctx.board().outcome().is_terminal() {
            return;
        }
        if ctx.is_bot_turn() {
            out.push(ctx);
        }
        for cell in ctx.board().empty_cells() {
            rec(ctx.play(cell).unwrap(), out);
        }
    }
    rec(GameContext::new(Mark::X, bot_started), &mut out);
    out
}

/// Bot-turn contexts reachable when the bot follows T3DT's support and the
/// opponent plays anything.
pub fn t3dt_contexts(mode: PolicyMode, bot_started: bool) -> Vec<GameContext> {
    let policy = T3dt::new(mode);
    let mut out = Vec::new();
    let mut stack = vec![GameContext::new(Mark::X, bot_started)];
    while let Some(ctx) = stack.pop() {
        if ctx.board().outcome().is_terminal() {
            continue;
        }
        let next = if ctx.is_bot_turn() {
            out.push(ctx);
            policy.decide(&ctx).unwrap().candidates()
        } else {
            ctx.board().empty_cells()
        };
        for cell in next {
            stack.push(ctx.play(cell).unwrap());
        }
    }
    out
}
