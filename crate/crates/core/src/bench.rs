//! Self-play timing: per-move nanosecond matrices and the metrics derived
//! from them.
//!
//! A run fills one `Ng × 9` matrix per algorithm where entry `(i, j)` is the
//! time spent choosing move `j` of game `i`. Moves a game never reached are
//! zero. From a matrix:
//!
//! * TPM_j: column `j` summed and divided by `Ng` (zeros included),
//! * TPG_i: row `i` summed; TPG is the mean of those, with the sample
//!   standard deviation alongside,
//! * speedup(X) = TPG(X) / TPG(T3DT).

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{BoardError, Mark};
use crate::minimax::{SearchAlgorithm, SearchPolicy};
use crate::policy::{GameContext, Policy, PolicyError, PolicyMode};
use crate::t3dt::T3dt;

pub const MOVES: usize = 9;
pub const DEFAULT_WARMUP: usize = 50;
pub const DEFAULT_GAMES: usize = 10_000;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("move index {0} is outside 1..=9")]
    MoveIndex(usize),
    #[error("need at least {needed} recorded games, have {have}")]
    TooFewGames { needed: usize, have: usize },
    #[error("TPG of the subject is zero")]
    ZeroDenominator,
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("no algorithms selected")]
    NoAlgorithms,
    #[error("policy failed during self-play: {0}")]
    Policy(#[from] PolicyError),
    #[error("self-play produced an illegal move: {0}")]
    Board(#[from] BoardError),
    #[error("a game server is running in this process; timings would be skewed")]
    Serving,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path} line {line}: {msg}")]
    Csv {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "MM")]
    Mm,
    #[serde(rename = "ABP")]
    Abp,
    #[serde(rename = "ABA")]
    Aba,
    #[serde(rename = "T3DT")]
    T3dt,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Mm,
        Algorithm::Abp,
        Algorithm::Aba,
        Algorithm::T3dt,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Mm => "MM",
            Algorithm::Abp => "ABP",
            Algorithm::Aba => "ABA",
            Algorithm::T3dt => "T3DT",
        }
    }

    pub fn policy(self, mode: PolicyMode) -> Box<dyn Policy> {
        match self {
            Algorithm::Mm => Box::new(SearchPolicy(SearchAlgorithm::Minimax)),
            Algorithm::Abp => Box::new(SearchPolicy(SearchAlgorithm::AlphaBeta)),
            Algorithm::Aba => Box::new(SearchPolicy(SearchAlgorithm::AlphaBetaDepth)),
            Algorithm::T3dt => Box::new(T3dt::new(mode)),
        }
    }

    /// Parses a comma-separated list such as `mm,t3dt`.
    pub fn parse_list(s: &str) -> Result<Vec<Algorithm>, BenchError> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let algo: Algorithm = part.parse()?;
            if !out.contains(&algo) {
                out.push(algo);
            }
        }
        if out.is_empty() {
            return Err(BenchError::NoAlgorithms);
        }
        Ok(out)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mm" => Ok(Algorithm::Mm),
            "abp" => Ok(Algorithm::Abp),
            "aba" => Ok(Algorithm::Aba),
            "t3dt" => Ok(Algorithm::T3dt),
            other => Err(BenchError::UnknownAlgorithm(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub games: usize,
    pub warmup_games: usize,
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
    pub mode: PolicyMode,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            games: DEFAULT_GAMES,
            warmup_games: DEFAULT_WARMUP,
            algorithms: Algorithm::ALL.to_vec(),
            seed: 0,
            mode: PolicyMode::Safe,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub host: String,
    pub os: String,
    pub arch: String,
    pub build_profile: String,
    pub timestamp_unix: u64,
}

impl Environment {
    pub fn capture() -> Environment {
        let host = std::env::var("HOSTNAME")
            .ok()
            .or_else(|| fs::read_to_string("/etc/hostname").ok())
            .map(|h| h.trim().to_string())
            .filter(|h| !h.is_empty())
            .unwrap_or_else(|| "unknown".into());
        Environment {
            host,
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            build_profile: if cfg!(debug_assertions) {
                "debug"
            } else {
                "release"
            }
            .into(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingMatrix {
    pub label: String,
    pub rows: Vec<[u64; MOVES]>,
    pub environment: Environment,
}

impl TimingMatrix {
    pub fn new(label: impl Into<String>, rows: Vec<[u64; MOVES]>) -> TimingMatrix {
        TimingMatrix {
            label: label.into(),
            rows,
            environment: Environment::capture(),
        }
    }

    pub fn games(&self) -> usize {
        self.rows.len()
    }

    /// Games that reached each move.
    pub fn participation(&self) -> [usize; MOVES] {
        let mut counts = [0; MOVES];
        for row in &self.rows {
            for (j, &ns) in row.iter().enumerate() {
                if ns > 0 {
                    counts[j] += 1;
                }
            }
        }
        counts
    }

    /// `game_index,move_index,ns`, one line per non-zero entry, both
    /// indices 1-based.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "game_index,move_index,ns")?;
        for (i, row) in self.rows.iter().enumerate() {
            for (j, &ns) in row.iter().enumerate() {
                if ns > 0 {
                    writeln!(out, "{},{},{}", i + 1, j + 1, ns)?;
                }
            }
        }
        Ok(())
    }

    /// Reads the CSV form back. `games` pads trailing all-zero games that
    /// the CSV cannot show; `None` takes the largest game index seen.
    pub fn read_csv(
        path: &Path,
        label: &str,
        games: Option<usize>,
    ) -> Result<TimingMatrix, BenchError> {
        let file = fs::File::open(path).map_err(io_err(path))?;
        let mut rows: Vec<[u64; MOVES]> = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err(path))?;
            let bad = |msg: &str| BenchError::Csv {
                path: path.to_path_buf(),
                line: n + 1,
                msg: msg.into(),
            };
            if n == 0 {
                if line.trim() != "game_index,move_index,ns" {
                    return Err(bad("unexpected header"));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let [g, m, ns] = fields[..] else {
                return Err(bad("expected three fields"));
            };
            let g: usize = g.trim().parse().map_err(|_| bad("bad game index"))?;
            let m: usize = m.trim().parse().map_err(|_| bad("bad move index"))?;
            let ns: u64 = ns.trim().parse().map_err(|_| bad("bad nanoseconds"))?;
            if g == 0 || !(1..=MOVES).contains(&m) {
                return Err(bad("index out of range"));
            }
            if rows.len() < g {
                rows.resize(g, [0; MOVES]);
            }
            rows[g - 1][m - 1] = ns;
        }
        if let Some(games) = games {
            if rows.len() > games {
                return Err(BenchError::Csv {
                    path: path.to_path_buf(),
                    line: 0,
                    msg: format!("{} games in file, expected {games}", rows.len()),
                });
            }
            rows.resize(games, [0; MOVES]);
        }
        Ok(TimingMatrix::new(label, rows))
    }
}

/// Mean over games of the time spent on move `j` (1-based).
pub fn tpm(matrix: &TimingMatrix, j: usize) -> Result<f64, BenchError> {
    if !(1..=MOVES).contains(&j) {
        return Err(BenchError::MoveIndex(j));
    }
    if matrix.rows.is_empty() {
        return Err(BenchError::TooFewGames { needed: 1, have: 0 });
    }
    let sum: u64 = matrix.rows.iter().map(|r| r[j - 1]).sum();
    Ok(sum as f64 / matrix.games() as f64)
}

pub fn tpm_vector(matrix: &TimingMatrix) -> Result<[f64; MOVES], BenchError> {
    let mut out = [0.0; MOVES];
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = tpm(matrix, j + 1)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tpg {
    pub mean: f64,
    /// Sample standard deviation; `None` with fewer than two games.
    pub std: Option<f64>,
    pub per_game: Vec<u64>,
}

pub fn tpg(matrix: &TimingMatrix) -> Result<Tpg, BenchError> {
    let n = matrix.games();
    if n == 0 {
        return Err(BenchError::TooFewGames { needed: 1, have: 0 });
    }
    let per_game: Vec<u64> = matrix.rows.iter().map(|r| r.iter().sum()).collect();
    let mean = per_game.iter().sum::<u64>() as f64 / n as f64;
    let std = (n >= 2).then(|| {
        let ss: f64 = per_game.iter().map(|&t| (t as f64 - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    });
    Ok(Tpg {
        mean,
        std,
        per_game,
    })
}

/// Sample standard deviation of TPG; needs two games.
pub fn tpg_std(matrix: &TimingMatrix) -> Result<f64, BenchError> {
    tpg(matrix)?.std.ok_or(BenchError::TooFewGames {
        needed: 2,
        have: matrix.games(),
    })
}

/// How many times faster the subject is than the reference.
pub fn speedup(reference_tpg: f64, subject_tpg: f64) -> Result<f64, BenchError> {
    if subject_tpg <= 0.0 {
        return Err(BenchError::ZeroDenominator);
    }
    Ok(reference_tpg / subject_tpg)
}

/// Times every move of `warmup + games` self-play games and keeps the last
/// `games` rows. Only the policy's move choice sits inside the clock.
pub fn time_selfplay(
    policy: &dyn Policy,
    games: usize,
    warmup: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<[u64; MOVES]>, BenchError> {
    let mut rows = Vec::with_capacity(games);
    for game in 0..warmup + games {
        let mut row = [0u64; MOVES];
        let mut ctx = GameContext::new(Mark::X, true);
        let mut ply = 0;
        while !ctx.board().outcome().is_terminal() {
            let view = ctx.for_mark(ctx.board().to_move());
            let start = Instant::now();
            let choice = policy.choose(&view, rng);
            let elapsed = start.elapsed();
            let (cell, _) = choice?;
            // zero is reserved for plies the game never reached
            row[ply] = (elapsed.as_nanos() as u64).max(1);
            ctx = ctx.play(cell)?;
            ply += 1;
        }
        if game >= warmup {
            rows.push(row);
        }
    }
    Ok(rows)
}

static SERVERS: AtomicUsize = AtomicUsize::new(0);

/// Held by a long-running server. While any guard is alive, [`run_selfplay`]
/// refuses to start.
#[derive(Debug)]
pub struct ServingGuard(());

impl ServingGuard {
    pub fn acquire() -> ServingGuard {
        SERVERS.fetch_add(1, Ordering::SeqCst);
        ServingGuard(())
    }
}

impl Drop for ServingGuard {
    fn drop(&mut self) {
        SERVERS.fetch_sub(1, Ordering::SeqCst);
    }
}

pub fn is_serving() -> bool {
    SERVERS.load(Ordering::SeqCst) > 0
}

/// Runs the configured self-play benchmark, one matrix per algorithm.
/// Algorithms run one after another on the calling thread.
pub fn run_selfplay(cfg: &BenchConfig) -> Result<BTreeMap<Algorithm, TimingMatrix>, BenchError> {
    if cfg.games == 0 {
        return Err(BenchError::TooFewGames { needed: 1, have: 0 });
    }
    if cfg.algorithms.is_empty() {
        return Err(BenchError::NoAlgorithms);
    }
    if is_serving() {
        return Err(BenchError::Serving);
    }
    let mut out = BTreeMap::new();
    for &algo in &cfg.algorithms {
        let policy = algo.policy(cfg.mode);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let rows = time_selfplay(policy.as_ref(), cfg.games, cfg.warmup_games, &mut rng)?;
        out.insert(algo, TimingMatrix::new(algo.label(), rows));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmMetrics {
    pub games: usize,
    pub tpm: [f64; MOVES],
    pub participation: [usize; MOVES],
    pub tpg_mean: f64,
    pub tpg_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupEntry {
    pub reference: Algorithm,
    pub subject: Algorithm,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub config: Option<BenchConfig>,
    pub environment: Environment,
    pub algorithms: BTreeMap<Algorithm, AlgorithmMetrics>,
    /// Every ordered pair of distinct algorithms.
    pub speedups: Vec<SpeedupEntry>,
}

impl MetricsReport {
    pub fn speedup_of(&self, subject: Algorithm, over: Algorithm) -> Option<f64> {
        self.speedups
            .iter()
            .find(|e| e.subject == subject && e.reference == over)
            .map(|e| e.ratio)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialise")
    }
}

pub fn metrics(
    matrices: &BTreeMap<Algorithm, TimingMatrix>,
    config: Option<&BenchConfig>,
) -> Result<MetricsReport, BenchError> {
    let mut algorithms = BTreeMap::new();
    for (&algo, m) in matrices {
        let t = tpg(m)?;
        algorithms.insert(
            algo,
            AlgorithmMetrics {
                games: m.games(),
                tpm: tpm_vector(m)?,
                participation: m.participation(),
                tpg_mean: t.mean,
                tpg_std: t.std,
            },
        );
    }
    let mut speedups = Vec::new();
    for (&reference, r) in &algorithms {
        for (&subject, s) in &algorithms {
            if reference != subject && s.tpg_mean > 0.0 {
                speedups.push(SpeedupEntry {
                    reference,
                    subject,
                    ratio: speedup(r.tpg_mean, s.tpg_mean)?,
                });
            }
        }
    }
    let environment = matrices
        .values()
        .next()
        .map(|m| m.environment.clone())
        .unwrap_or_else(Environment::capture);
    Ok(MetricsReport {
        config: config.cloned(),
        environment,
        algorithms,
        speedups,
    })
}

/// `6.19E+09` style: two decimals, signed two-digit exponent.
pub fn sci(x: f64) -> String {
    if x == 0.0 {
        return "0.00E+00".into();
    }
    let s = format!("{x:.2E}");
    let (mantissa, exp) = s.split_once('E').expect("E formatting");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}E{sign}{:02}", exp.abs())
}

/// Plain-text TPM, TPG, std and speedup tables.
pub fn render_tables(report: &MetricsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "TPM (ns) per move index");
    let _ = write!(s, "{:<10}", "Algorithm");
    for j in 1..=MOVES {
        let _ = write!(s, "\t{j}");
    }
    s.push('\n');
    for (algo, m) in &report.algorithms {
        let _ = write!(s, "{:<10}", algo.label());
        for v in m.tpm {
            let _ = write!(s, "\t{}", sci(v));
        }
        s.push('\n');
    }
    let _ = writeln!(s, "\nTPG (ns)\n{:<10}\tmean\tstd", "Algorithm");
    for (algo, m) in &report.algorithms {
        let std = m.tpg_std.map_or_else(|| "n/a".to_string(), sci);
        let _ = writeln!(s, "{:<10}\t{}\t{}", algo.label(), sci(m.tpg_mean), std);
    }
    if report.algorithms.contains_key(&Algorithm::T3dt) {
        let _ = writeln!(s, "\nSpeedup of T3DT over");
        for e in report
            .speedups
            .iter()
            .filter(|e| e.subject == Algorithm::T3dt)
        {
            let _ = writeln!(s, "{:<10}\t{}", e.reference.label(), sci(e.ratio));
        }
    }
    s
}

/// Writes `<label>_timings.csv` per algorithm, `metrics.json` and
/// `tables.txt` into `dir`. Returns the paths written.
pub fn export(
    dir: &Path,
    matrices: &BTreeMap<Algorithm, TimingMatrix>,
    report: &MetricsReport,
) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for (algo, m) in matrices {
        let path = dir.join(format!("{}_timings.csv", algo.label().to_ascii_lowercase()));
        let file = fs::File::create(&path).map_err(io_err(&path))?;
        let mut w = io::BufWriter::new(file);
        m.write_csv(&mut w).map_err(io_err(&path))?;
        w.flush().map_err(io_err(&path))?;
        written.push(path);
    }
    let json = dir.join("metrics.json");
    fs::write(&json, report.to_json()).map_err(io_err(&json))?;
    written.push(json);
    let tables = dir.join("tables.txt");
    fs::write(&tables, render_tables(report)).map_err(io_err(&tables))?;
    written.push(tables);
    Ok(written)
}
