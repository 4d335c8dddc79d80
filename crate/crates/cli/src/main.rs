use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use tictac_cli::commands::{self, PolicyName, EXIT_ERROR};
use tictac_cli::{play, server};
use tictac_core::bench::{Algorithm, BenchConfig, DEFAULT_GAMES, DEFAULT_WARMUP};
use tictac_core::{PolicyMode, Role, Seat};

#[derive(Parser)]
#[command(
    name = "tictac",
    version,
    about = "Unbeatable randomized tic-tac-toe: play, verify, benchmark, serve"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum First {
    Bot,
    Human,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Safe,
}

impl From<ModeArg> for PolicyMode {
    fn from(m: ModeArg) -> PolicyMode {
        match m {
            ModeArg::Strict => PolicyMode::Strict,
            ModeArg::Safe => PolicyMode::Safe,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    First,
    Second,
    Both,
}

impl From<RoleArg> for Role {
    fn from(r: RoleArg) -> Role {
        match r {
            RoleArg::First => Role::First,
            RoleArg::Second => Role::Second,
            RoleArg::Both => Role::Both,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Play against the bot in the terminal. You are O.
    Play {
        #[arg(long, value_enum, default_value = "human")]
        first: First,
        /// Defaults to a seed derived from the clock; it is printed either way.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "safe")]
        mode: ModeArg,
    },
    /// Exhaustively check that a policy never loses. Exits 0 iff no losses.
    Verify {
        #[arg(long, value_enum)]
        policy: PolicyName,
        #[arg(long, value_enum, default_value = "both")]
        role: RoleArg,
        #[arg(long, value_enum, default_value = "safe")]
        mode: ModeArg,
        /// JSON report path; defaults to verify_<policy>_<role>_<mode>.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count every distinct game from the empty board.
    Enumerate {
        #[arg(long)]
        json: bool,
    },
    /// Time self-play games and write CSV, JSON and table reports.
    Bench {
        #[arg(long, default_value_t = DEFAULT_GAMES)]
        games: usize,
        #[arg(long, default_value_t = DEFAULT_WARMUP)]
        warmup: usize,
        /// Comma-separated subset of mm,abp,aba,t3dt.
        #[arg(long, default_value = "mm,abp,aba,t3dt")]
        algos: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "safe")]
        mode: ModeArg,
    },
    /// Serve the JSON play API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Seeds games created without an explicit seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Minutes a game may sit idle before it is dropped.
        #[arg(long, default_value_t = 30)]
        idle_minutes: u64,
    },
}

fn clock_seed() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos() as u64)
}

fn run(cli: Cli) -> io::Result<u8> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Play { first, seed, mode } => {
            let first = match first {
                First::Bot => Seat::Bot,
                First::Human => Seat::Opponent,
            };
            let seed = seed.unwrap_or_else(clock_seed);
            let outcome = play::run(io::stdin().lock(), &mut stdout, first, seed, mode.into())?;
            Ok(if outcome.is_some() { 0 } else { EXIT_ERROR })
        }
        Command::Verify {
            policy,
            role,
            mode,
            out,
        } => {
            let (role, mode) = (role.into(), mode.into());
            let path = out.unwrap_or_else(|| commands::default_report_path(policy, role, mode));
            commands::verify(&mut stdout, policy, role, mode, &path)
        }
        Command::Enumerate { json } => commands::enumerate(&mut stdout, json),
        Command::Bench {
            games,
            warmup,
            algos,
            out,
            seed,
            mode,
        } => {
            let algorithms = match Algorithm::parse_list(&algos) {
                Ok(a) => a,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(EXIT_ERROR);
                }
            };
            let cfg = BenchConfig {
                games,
                warmup_games: warmup,
                algorithms,
                seed,
                mode: mode.into(),
            };
            commands::bench(&mut stdout, &cfg, &out)
        }
        Command::Serve {
            port,
            seed,
            idle_minutes,
        } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(server::serve(
                port,
                seed,
                Duration::from_secs(idle_minutes.max(1) * 60),
            ))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
