use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use carnot_cli::sweep::SweepParam;
use carnot_cli::verify::{report_json, run_verify};
use carnot_cli::{exit_code, run_solve, run_sweep, ConfigError};
use clap::{Parser, Subcommand};

/// Deterministic game solver for singular parabolic equations on Carnot groups.
#[derive(Parser, Debug)]
#[command(name = "carnot-game", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the game described by a TOML config and write CSV layers.
    Solve {
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a property suite: algebra, operators, adversary, regularity, oracle.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-run a config over several values of epsilon or h.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma separated values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| ConfigError(format!("THREADS must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(ConfigError("THREADS must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    init_threads()?;
    match cli.command {
        Command::Solve { config, out } => {
            let outcome = run_solve(&config, out.as_deref())?;
            for w in &outcome.manifest.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(last) = outcome.radius.last() {
                eprintln!("t = {:.6}  r = {:.6}", last.t, last.r_measured);
            }
            Ok(0)
        }
        Command::Verify { suite, seed } => {
            let report = run_verify(&suite, seed)?;
            println!("{}", serde_json::to_string_pretty(&report_json(&report, seed))?);
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Sweep { config, param, values, out } => {
            let param: SweepParam = param.parse()?;
            let rows = run_sweep(&config, param, &values, out.as_deref())?;
            for r in rows {
                match r.error {
                    Some(e) => println!("{:.6}  {:.6e}", r.value, e),
                    None => println!("{:.6}  -", r.value),
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
