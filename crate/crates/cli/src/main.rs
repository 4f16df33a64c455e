//! `kplab`: run experiments on the degenerate Kolmogorov-Prandtl model.
//!
//! ```text
//! kplab diagnose --config runs/rough.toml --out results/rough
//! kplab suite --quiet
//! ```
//!
//! The exit status is 0 when every verdict passes, 1 when one fails and 2
//! when the run could not be carried out. `KPLAB_WORKERS` sets the size of
//! the worker pool.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use kplab::config::{parse_config, ExperimentConfig};
use kplab::experiment::{run_experiment, Command};

#[derive(Parser, Debug)]
#[command(name = "kplab", version, about = "Pseudo-spectral laboratory for the degenerate Kolmogorov-Prandtl equation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Configuration file (dotted key-value TOML). Defaults apply without one.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed for the random initial profile; overrides `solve.seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Only print warnings and errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Integrate the configured scheme and write a checkpoint and norm table.
    Solve,
    /// Picard iteration through the linearized problem; contraction table.
    Picard,
    /// Sweep of the weighted system over the configured deltas.
    Modified,
    /// Solve, then factorial bounds, derivative table, radii and commutator residuals.
    Diagnose,
    /// Residuals of the commutator identity.
    CommutatorCheck,
    /// Spectral solve against the finite-difference reference.
    OracleCompare,
    /// The full acceptance matrix.
    Suite,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::Picard => Command::Picard,
            Cmd::Modified => Command::Modified,
            Cmd::Diagnose => Command::Diagnose,
            Cmd::CommutatorCheck => Command::CommutatorCheck,
            Cmd::OracleCompare => Command::OracleCompare,
            Cmd::Suite => Command::Suite,
        }
    }
}

fn configure_workers() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("KPLAB_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("KPLAB_WORKERS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        bail!("KPLAB_WORKERS must be a positive integer, got 0");
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("building the worker pool")?;
    #[cfg(not(feature = "parallel"))]
    log::warn!("KPLAB_WORKERS={n} ignored: built without the parallel feature");
    Ok(())
}

fn load(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => parse_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.output.directory = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.solve.seed = seed;
    }
    Ok(config)
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    configure_workers()?;
    let config = load(cli)?;
    let command = Command::from(cli.command);
    log::info!(
        "{} -> {} (config {})",
        command.name(),
        config.output.directory.display(),
        &config.hash()[..12]
    );
    let report = run_experiment(&config, command)?;
    for v in &report.verdicts {
        if !cli.quiet {
            println!("{}", v.line());
        } else if !v.passed {
            log::warn!("{}", v.line());
        }
    }
    if !cli.quiet {
        println!("report: {}", config.output.directory.join(kplab::report::REPORT_FILE).display());
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info };
    env_logger::Builder::new().filter_level(level).init();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
