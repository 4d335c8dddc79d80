mod common;

use common::{c, cells};
use std::collections::BTreeMap;
use tictac_core::minimax::{aba_move, abp_move, mm_move};
use tictac_core::verify::{
    enumerate_games, enumerate_games_parallel, optimality_scan, reachable_positions,
    verify_no_loss, verify_opening,
};
use tictac_core::{
    Board, Cell, GameRecord, Mark, Outcome, PolicyMode, Role, SearchAlgorithm, SearchPolicy,
    Symmetry, T3dt, UniformRandom,
};

#[test]
fn census_matches_the_known_totals() {
    let census = enumerate_games();
    assert_eq!(census.total_games, 255_168);
    assert_eq!(census.x_wins, 131_184);
    assert_eq!(census.o_wins, 77_904);
    assert_eq!(census.draws, 46_080);
    let by_len: Vec<(usize, u64)> = census.games_by_length.clone().into_iter().collect();
    assert_eq!(
        by_len,
        vec![(5, 1440), (6, 5328), (7, 47_952), (8, 72_576), (9, 127_872)]
    );
    assert!((census.win_ratio() - 1.68).abs() < 0.01);
    assert_eq!(enumerate_games_parallel(), census);
}

/// Independent count of nine-ply games by brute force over permutations:
/// a permutation is a full-length game iff no prefix before the last move
/// completes a line.
#[test]
fn nine_ply_count_by_permutation() {
    fn permute(prefix: &mut Vec<usize>, used: u16, count: &mut u64) {
        if prefix.len() == 9 {
            *count += 1;
            return;
        }
        for i in 0..9 {
            if used & (1 << i) != 0 {
                continue;
            }
            prefix.push(i);
            let won = {
                let mine: Vec<usize> = prefix
                    .iter()
                    .skip((prefix.len() - 1) % 2)
                    .step_by(2)
                    .copied()
                    .collect();
                tictac_core::board::LINES
                    .iter()
                    .any(|l| l.iter().all(|&x| mine.contains(&(x as usize))))
            };
            if !won || prefix.len() == 9 {
                permute(prefix, used | (1 << i), count);
            }
            prefix.pop();
        }
    }
    let mut count = 0;
    permute(&mut Vec::new(), 0, &mut count);
    assert_eq!(count, enumerate_games().games_by_length[&9]);
}

#[test]
fn search_baselines_never_lose() {
    for algo in [
        SearchAlgorithm::Minimax,
        SearchAlgorithm::AlphaBeta,
        SearchAlgorithm::AlphaBetaDepth,
    ] {
        let report = verify_no_loss(&SearchPolicy(algo), Role::Both).unwrap();
        assert!(report.is_no_loss(), "{algo}: {report:?}");
        assert!(report.losses.is_empty());
    }
}

#[test]
fn t3dt_is_no_loss_in_both_modes() {
    for mode in [PolicyMode::Safe, PolicyMode::Strict] {
        let report = verify_no_loss(&T3dt::new(mode), Role::Both).unwrap();
        assert!(report.is_no_loss(), "{mode}: {:?}", report.losses.first());
        assert_eq!(report.mode, Some(mode));
        assert_eq!(report.games, report.wins + report.draws);
        assert!(report.branch_nodes > 0);
    }
}

#[test]
fn random_second_player_loses_and_transcripts_replay() {
    let report = verify_no_loss(&UniformRandom, Role::Second).unwrap();
    assert!(!report.is_no_loss());
    assert_eq!(report.games, 255_168);
    assert_eq!(report.loss_count, 131_184);
    for text in &report.losses {
        let record = GameRecord::parse_transcript(text).unwrap();
        assert_eq!(record.replay().unwrap().outcome(), Outcome::OWin);
        assert_eq!(record.outcome, Outcome::OWin);
    }
}

#[test]
fn report_outcomes_are_invariant_under_symmetry() {
    let policy = T3dt::new(PolicyMode::Safe);
    for opening in [vec![0usize], vec![1], vec![4]] {
        let base = verify_opening(&policy, false, &cells(&opening)).unwrap();
        for sym in Symmetry::all() {
            let moved: Vec<Cell> = opening.iter().map(|&i| sym.apply(c(i))).collect();
            let r = verify_opening(&policy, false, &moved).unwrap();
            assert_eq!(
                (r.games, r.wins, r.draws, r.loss_count),
                (base.games, base.wins, base.draws, base.loss_count)
            );
        }
    }
}

#[test]
fn search_values_agree_in_sign_on_every_position() {
    let mut positions = 0;
    for first in [Mark::X, Mark::O] {
        for board in reachable_positions(first) {
            if board.outcome().is_terminal() {
                continue;
            }
            let mark = board.to_move();
            let mm = mm_move(&board, mark).unwrap();
            let abp = abp_move(&board, mark).unwrap();
            let aba = aba_move(&board, mark).unwrap();
            assert_eq!(mm.score.signum(), abp.score.signum(), "{board}");
            assert_eq!(mm.score.signum(), aba.score.signum(), "{board}");
            assert_eq!(mm.cell, abp.cell, "{board}");
            positions += 1;
        }
    }
    assert!(positions < 2 * 6_000);
}

#[test]
fn reachable_position_counts() {
    let x_first = reachable_positions(Mark::X);
    assert_eq!(x_first.len(), 5_478);
    let o_first = reachable_positions(Mark::O);
    assert_eq!(o_first.len(), 5_478);
    let mut seen = BTreeMap::new();
    for b in &x_first {
        *seen.entry(b.move_count()).or_insert(0) += 1;
    }
    assert_eq!(seen[&0], 1);
    assert_eq!(seen[&1], 9);
    assert_eq!(seen[&2], 72);
}

#[test]
fn optimality_scan_finds_the_slow_win_position() {
    let cases = optimality_scan();
    let fig = Board::parse_with_first("OOX.X..O.", Mark::O).unwrap();
    let hit = cases
        .iter()
        .find(|case| case.board == fig)
        .expect("slow-win position listed");
    assert_eq!(hit.aba_cell, Cell::from_row_col(3, 1).unwrap());
    assert!(hit.plies_to_win_mm > hit.plies_to_win_aba);
    for case in &cases {
        // a position with only one game-winning move is never listed
        let mover = case.board.to_move();
        let winning = case
            .board
            .empty_cells()
            .iter()
            .filter(|&cell| {
                let next = case.board.place(cell).unwrap();
                next.outcome().winner() == Some(mover)
                    || (!next.outcome().is_terminal()
                        && mm_move(&next, mover.opponent()).unwrap().score.0 < 0)
            })
            .count();
        assert!(winning >= 2, "{}", case.board);
        assert!(case.plies_to_win_aba % 2 == 1 && case.plies_to_win_mm % 2 == 1);
    }
}
