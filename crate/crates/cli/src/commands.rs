//! Non-interactive commands. Each writes its human-readable summary to
//! `out` and returns the process exit code.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use tictac_core::bench::{export, metrics, render_tables, run_selfplay, BenchConfig, BenchError};
use tictac_core::verify::{enumerate_games, verify_no_loss};
use tictac_core::{Policy, PolicyMode, Role, SearchAlgorithm, SearchPolicy, T3dt, UniformRandom};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PolicyName {
    T3dt,
    Mm,
    Abp,
    Aba,
    Random,
}

impl PolicyName {
    pub fn build(self, mode: PolicyMode) -> Box<dyn Policy> {
        match self {
            PolicyName::T3dt => Box::new(T3dt::new(mode)),
            PolicyName::Mm => Box::new(SearchPolicy(SearchAlgorithm::Minimax)),
            PolicyName::Abp => Box::new(SearchPolicy(SearchAlgorithm::AlphaBeta)),
            PolicyName::Aba => Box::new(SearchPolicy(SearchAlgorithm::AlphaBetaDepth)),
            PolicyName::Random => Box::new(UniformRandom),
        }
    }
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_LOSSES: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

/// Runs the exhaustive no-loss check and writes the JSON report to
/// `report_path`. Exit 0 iff there are no losses.
pub fn verify<W: Write>(
    out: &mut W,
    policy: PolicyName,
    role: Role,
    mode: PolicyMode,
    report_path: &Path,
) -> io::Result<u8> {
    let policy = policy.build(mode);
    let report = match verify_no_loss(policy.as_ref(), role) {
        Ok(r) => r,
        Err(e) => {
            writeln!(out, "verification aborted: {e}")?;
            return Ok(EXIT_ERROR);
        }
    };
    if let Some(dir) = report_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(report_path, report.to_json() + "\n")?;
    let mode = report
        .mode
        .map_or_else(|| "-".to_string(), |m| m.to_string());
    writeln!(
        out,
        "policy {} role {} mode {mode}: {} games, {} wins, {} draws, {} losses, {} branch nodes",
        report.policy,
        report.role,
        report.games,
        report.wins,
        report.draws,
        report.loss_count,
        report.branch_nodes
    )?;
    if let Some(first) = report.losses.first() {
        writeln!(out, "first losing line:\n{first}")?;
    }
    writeln!(out, "report written to {}", report_path.display())?;
    Ok(if report.is_no_loss() {
        EXIT_OK
    } else {
        EXIT_LOSSES
    })
}

pub fn enumerate<W: Write>(out: &mut W, json: bool) -> io::Result<u8> {
    let census = enumerate_games();
    if json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&census).map_err(io::Error::other)?
        )?;
    } else {
        write!(out, "{census}")?;
    }
    Ok(EXIT_OK)
}

/// Runs the self-play benchmark and exports CSVs, `metrics.json` and
/// `tables.txt` into `dir`.
pub fn bench<W: Write>(out: &mut W, cfg: &BenchConfig, dir: &Path) -> io::Result<u8> {
    let result = run_selfplay(cfg).and_then(|runs| {
        let report = metrics(&runs, Some(cfg))?;
        let files = export(dir, &runs, &report)?;
        Ok::<_, BenchError>((report, files))
    });
    match result {
        Ok((report, files)) => {
            write!(out, "{}", render_tables(&report))?;
            for f in files {
                writeln!(out, "wrote {}", f.display())?;
            }
            Ok(EXIT_OK)
        }
        Err(e) => {
            writeln!(out, "bench failed: {e}")?;
            Ok(EXIT_ERROR)
        }
    }
}

pub fn default_report_path(policy: PolicyName, role: Role, mode: PolicyMode) -> PathBuf {
    let name = format!("{policy:?}").to_ascii_lowercase();
    PathBuf::from(format!("verify_{name}_{role}_{mode}.json"))
}
