//! `ruinlab`: ruin-probability bounds, simulation and validation runs.

mod commands;
mod config;
mod error;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{ErgodicMode, Report};
use config::RunConfig;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ruinlab", version, about = "Ruin probabilities for an insurer investing in a risky asset")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed. Falls back to the config, then to RUINLAB_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sample count of the selected command (paths, samples or replications).
    #[arg(long, global = true, value_name = "N")]
    paths: Option<u64>,
    /// Claim horizon per path (simulate) or base budget (ergodic certain-ruin).
    #[arg(long, global = true, value_name = "N")]
    max_jumps: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Directory for artifacts and the resolved config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Initial capitals, e.g. "20,40,80".
    #[arg(long, global = true, value_name = "LIST", allow_hyphen_values = true)]
    u_grid: Option<String>,
    /// Format of the result printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form exponent and constants.
    Bounds {
        /// Premium decay rate for the effective exponent.
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
    },
    /// Ruin curve on a capital grid, with a tail fit.
    Simulate,
    /// Tail constant of the perpetuity and the top of its sample.
    FixedPoint,
    /// Cross-check the claim-instant chain against time stepping.
    OracleCheck {
        /// Scale the oracle volatility by this factor (negative control).
        #[arg(long)]
        perturb_sigma: Option<f64>,
    },
    /// Random-coefficient AR(1) and ladder-epoch checks.
    Ergodic {
        #[arg(long, value_enum, default_value_t = ErgodicMode::Cesaro)]
        mode: ErgodicMode,
    },
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None if matches!(cli.command, Command::Ergodic { mode: ErgodicMode::Cesaro | ErgodicMode::Ladder }) => {
            RunConfig::default()
        }
        None => return Err(CliError::Usage("--config is required for this command".into())),
    };
    cfg.seed = Some(match (c.seed, cfg.seed) {
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => match std::env::var("RUINLAB_SEED") {
            Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("RUINLAB_SEED is not a u64: {v:?}")))?,
            Err(_) => 0,
        },
    });
    let grid = c.u_grid.as_deref().map(commands::parse_grid).transpose()?;
    match &cli.command {
        Command::Simulate => {
            override_with(&mut cfg.simulation.n_paths, c.paths);
            override_with(&mut cfg.simulation.max_jumps, c.max_jumps);
            override_with(&mut cfg.simulation.u_grid, grid);
        }
        Command::FixedPoint => override_with(&mut cfg.perpetuity.n_samples, c.paths),
        Command::OracleCheck { .. } => {
            override_with(&mut cfg.oracle.n_paths, c.paths);
            override_with(&mut cfg.oracle.u, grid);
        }
        Command::Ergodic { mode } => match mode {
            ErgodicMode::Cesaro => override_with(&mut cfg.ergodic.n_limit_samples, c.paths),
            ErgodicMode::Ladder => override_with(&mut cfg.ergodic.n_reps, c.paths),
            ErgodicMode::CertainRuin => {
                override_with(&mut cfg.ergodic.n_paths, c.paths);
                if let Some(m) = c.max_jumps {
                    cfg.ergodic.budgets = vec![m, 2 * m];
                }
            }
        },
        Command::Bounds { .. } => {}
    }
    cfg.canonicalise()?;
    if let (Command::OracleCheck { .. }, Ok(p)) = (&cli.command, cfg.params()) {
        cfg.oracle.dt.get_or_insert(1e-3 / p.alpha());
        cfg.oracle.t_max.get_or_insert(20.0 / p.alpha());
    }
    Ok(cfg)
}

fn override_with<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Report, CliError> {
    match &cli.command {
        Command::Bounds { gamma } => commands::bounds(cfg, *gamma),
        Command::Simulate => commands::simulate(cfg),
        Command::FixedPoint => commands::fixed_point(cfg),
        Command::OracleCheck { perturb_sigma } => commands::oracle_check(cfg, *perturb_sigma),
        Command::Ergodic { mode } => commands::ergodic(cfg, *mode),
    }
}

fn write_artifacts(dir: &Path, cfg: &RunConfig, report: &Report) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut config = cfg.to_json();
    config.push('\n');
    fs::write(dir.join("config.json"), config)?;
    for (name, body) in &report.artifacts {
        fs::write(dir.join(name), body)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve(cli)?;
    let report = match cli.common.workers {
        Some(0) => return Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?
            .install(|| execute(cli, &cfg))?,
        None => execute(cli, &cfg)?,
    };
    if let Some(dir) = &cli.common.out {
        write_artifacts(dir, &cfg, &report)?;
    }
    match (cli.common.format, &report.csv) {
        (Format::Csv, Some(csv)) => {
            eprintln!("resolved config: {}", serde_json::to_string(&cfg).expect("config serialises"));
            print!("{csv}");
        }
        _ => {
            let mut doc = serde_json::json!({ "config": cfg });
            if let (Some(out), Some(obj)) = (doc.as_object_mut(), report.json.as_object()) {
                out.extend(obj.clone());
            }
            print!("{}", commands::pretty(&doc));
        }
    }
    match report.failure {
        Some(msg) => Err(CliError::Validation(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ruinlab: {e}");
            e.exit_code()
        }
    }
}
