//! Parameter sweeps over the qmeter-core model with CSV and SVG output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use clap::ValueEnum;

pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Single,
    Sequence,
    Rotation,
    Thermal,
    Scaling,
    Compare,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Single => "single",
            Command::Sequence => "sequence",
            Command::Rotation => "rotation",
            Command::Thermal => "thermal",
            Command::Scaling => "scaling",
            Command::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub command: Command,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub svg: bool,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
    pub messages: Vec<String>,
    pub not_converged: usize,
}

/// `--threads`, then `QMETER_THREADS`, then the rayon default.
pub fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var("QMETER_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("QMETER_THREADS = {v:?}"))),
        Err(_) => Ok(0),
    }
}

pub fn execute(
    command: Command,
    cfg: &RunConfig,
    seed: u64,
    threads: usize,
) -> Result<commands::Report, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    match command {
        Command::Single => commands::run_single(cfg, &pool),
        Command::Sequence => commands::run_sequence(cfg, &pool, seed),
        Command::Rotation => commands::run_rotation(cfg, &pool),
        Command::Thermal => commands::run_thermal(cfg, &pool),
        Command::Scaling => commands::run_scaling(cfg, &pool),
        Command::Compare => commands::run_compare(cfg, &pool),
    }
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::config(format!("output dir {}: {e}", dir.display())))
}

/// Loads the config, runs the command and writes its files. A run with
/// non-converged cells still writes everything before reporting them.
pub fn run(opts: &RunOptions) -> Result<RunSummary, CliError> {
    let cfg = config::load(&opts.config)?;
    let seed = opts.seed.or(cfg.seed).unwrap_or(0);
    let threads = resolve_threads(opts.threads)?;
    let dir = opts
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let report = execute(opts.command, &cfg, seed, threads)?;
    prepare_dir(&dir)?;
    let csv = dir.join(format!("{}.csv", opts.command.name()));
    report.table.write_csv(&csv)?;
    let svg = if opts.svg {
        let path = dir.join(format!("{}.svg", opts.command.name()));
        std::fs::write(&path, &report.svg)?;
        Some(path)
    } else {
        None
    };
    Ok(RunSummary {
        csv,
        svg,
        messages: report.messages,
        not_converged: report.not_converged,
    })
}
