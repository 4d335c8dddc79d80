mod common;

use common::{all_bot_contexts, c, cells, t3dt_contexts};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tictac_core::t3dt::candidates;
use tictac_core::verify::verify_opening;
use tictac_core::{
    play_game, Cell, GameContext, Mark, Outcome, Policy, PolicyMode, RuleId, SearchAlgorithm,
    SearchPolicy, Seat, Symmetry, T3dt, UniformRandom,
};

const MODES: [PolicyMode; 2] = [PolicyMode::Strict, PolicyMode::Safe];

#[test]
fn win_and_block_take_priority_everywhere() {
    for mode in MODES {
        for started in [true, false] {
            for ctx in all_bot_contexts(started) {
                let d = candidates(&ctx, mode).unwrap();
                let board = ctx.board();
                let wins = board.winning_moves(Mark::X);
                let blocks = board.winning_moves(Mark::O);
                if !wins.is_empty() {
                    assert_eq!(d.rule(), Some(RuleId::Win), "{ctx:?}");
                    assert_eq!(d.candidates(), wins);
                } else if !blocks.is_empty() {
                    assert_eq!(d.rule(), Some(RuleId::Block), "{ctx:?}");
                    assert_eq!(d.candidates(), blocks);
                }
            }
        }
    }
}

#[test]
fn decisions_are_legal_and_normalised() {
    for mode in MODES {
        for started in [true, false] {
            for ctx in all_bot_contexts(started) {
                let d = candidates(&ctx, mode).unwrap();
                assert!(!d.candidates().is_empty());
                assert!(
                    d.candidates().is_subset(ctx.board().empty_cells()),
                    "{ctx:?}"
                );
                let total: f64 = Cell::ALL.iter().map(|&cell| d.weight(cell)).sum();
                assert!((total - 1.0).abs() < 1e-12);
                for cell in Cell::ALL {
                    assert_eq!(d.weight(cell) > 0.0, d.candidates().contains(cell));
                }
            }
        }
    }
}

#[test]
fn strict_never_uses_fork_rules() {
    for started in [true, false] {
        for ctx in all_bot_contexts(started) {
            let rule = candidates(&ctx, PolicyMode::Strict).unwrap().rule();
            assert!(!matches!(rule, Some(RuleId::ForkMake | RuleId::ForkBlock)));
        }
    }
}

#[test]
fn every_rule_is_equivariant_on_t3dt_lines() {
    for mode in MODES {
        for started in [true, false] {
            for ctx in t3dt_contexts(mode, started) {
                let d = candidates(&ctx, mode).unwrap();
                for sym in Symmetry::all() {
                    let t = candidates(&ctx.transform(sym), mode).unwrap();
                    assert_eq!(t.rule(), d.rule(), "{ctx:?} under {sym:?}");
                    assert_eq!(
                        t.candidates(),
                        sym.apply_set(d.candidates()),
                        "{ctx:?} under {sym:?}"
                    );
                    for cell in Cell::ALL {
                        assert!((t.weight(sym.apply(cell)) - d.weight(cell)).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn tree_rules_are_equivariant_off_the_main_line() {
    for started in [true, false] {
        for ctx in all_bot_contexts(started) {
            let d = candidates(&ctx, PolicyMode::Safe).unwrap();
            if !d.rule().is_some_and(RuleId::is_tree_rule) {
                continue;
            }
            for sym in Symmetry::all() {
                let t = candidates(&ctx.transform(sym), PolicyMode::Safe).unwrap();
                assert_eq!(t.rule(), d.rule());
                assert_eq!(t.candidates(), sym.apply_set(d.candidates()));
            }
        }
    }
}

/// Checks a branch's win guarantee over every opening in its D4 orbit.
fn assert_branch_always_wins(x1: usize, o1: usize) {
    let policy = T3dt::new(PolicyMode::Safe);
    for sym in Symmetry::all() {
        let opening = [sym.apply(c(x1)), sym.apply(c(o1))];
        let report = verify_opening(&policy, true, &opening).unwrap();
        assert!(report.games > 0);
        assert_eq!(report.wins, report.games, "{opening:?}: {report:?}");
    }
}

#[test]
fn corner_then_edge_always_wins() {
    assert_branch_always_wins(0, 1);
    assert_branch_always_wins(0, 5);
}

#[test]
fn corner_then_corner_always_wins() {
    assert_branch_always_wins(0, 2);
    assert_branch_always_wins(0, 8);
}

#[test]
fn centre_then_edge_always_wins() {
    assert_branch_always_wins(4, 1);
}

#[test]
fn slow_win_position_is_a_win_rule() {
    let ctx = GameContext::from_moves(Mark::X, false, &cells(&[0, 2, 1, 4, 7])).unwrap();
    assert_eq!(ctx.board().to_string(), "OOX.X..O.");
    let d = candidates(&ctx, PolicyMode::Safe).unwrap();
    assert_eq!(d.rule(), Some(RuleId::Win));
    assert_eq!(
        d.candidates().to_vec(),
        vec![Cell::from_row_col(3, 1).unwrap()]
    );
}

#[test]
fn safe_bot_never_loses_to_random_play() {
    let bot = T3dt::new(PolicyMode::Safe);
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
    let mut wins = 0;
    for _ in 0..10_000 {
        let game = play_game(&bot, &UniformRandom, Seat::Bot, &mut rng).unwrap();
        assert_ne!(game.outcome, Outcome::OWin, "{}", game.to_transcript());
        assert_eq!(game.replay().unwrap().outcome(), game.outcome);
        wins += usize::from(game.outcome == Outcome::XWin);
    }
    // random play loses most games to a first-moving fork player
    assert!(wins > 8_000, "{wins}");
}

#[test]
fn minimax_self_play_is_a_draw() {
    let mm = SearchPolicy(SearchAlgorithm::Minimax);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let game = play_game(&mm, &mm, Seat::Bot, &mut rng).unwrap();
    assert_eq!(game.outcome, Outcome::Draw);
    assert_eq!(game.plies.len(), 9);
}

#[test]
fn t3dt_self_play_is_a_draw() {
    let bot = T3dt::new(PolicyMode::Safe);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for first in [Seat::Bot, Seat::Opponent] {
        for _ in 0..200 {
            let game = play_game(&bot, &bot, first, &mut rng).unwrap();
            assert_eq!(game.outcome, Outcome::Draw, "{}", game.to_transcript());
        }
    }
}

#[test]
fn choose_is_deterministic_per_seed() {
    let bot = T3dt::new(PolicyMode::Safe);
    let ctx = GameContext::new(Mark::X, true);
    let draw = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..50)
            .map(|_| bot.choose(&ctx, &mut rng).unwrap().0)
            .collect::<Vec<_>>()
    };
    assert_eq!(draw(9), draw(9));
    assert_ne!(draw(9), draw(10));
}

#[test]
fn opening_frequencies_match_the_weights() {
    let bot = T3dt::new(PolicyMode::Safe);
    let ctx = GameContext::new(Mark::X, true);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 1_000_000;
    let mut counts = [0u32; 9];
    for _ in 0..n {
        counts[bot.choose(&ctx, &mut rng).unwrap().0.index()] += 1;
    }
    let freq = |i: usize| f64::from(counts[i]) / n as f64;
    assert!((freq(4) - 1.0 / 3.0).abs() < 0.005);
    for i in [0, 1, 2, 3, 5, 6, 7, 8] {
        assert!(
            (freq(i) - 1.0 / 12.0).abs() < 0.005,
            "cell {i}: {}",
            freq(i)
        );
    }
    // chi-square with 8 degrees of freedom; 26.1 is the 0.001 critical value
    let expected = [
        1.0 / 12.0,
        1.0 / 12.0,
        1.0 / 12.0,
        1.0 / 12.0,
        1.0 / 3.0,
        1.0 / 12.0,
        1.0 / 12.0,
        1.0 / 12.0,
        1.0 / 12.0,
    ];
    let chi2: f64 = (0..9)
        .map(|i| {
            let e = expected[i] * n as f64;
            (f64::from(counts[i]) - e).powi(2) / e
        })
        .sum();
    assert!(chi2 < 26.1, "chi2 {chi2}");
}
