//! Command-line experiment runner.
//!
//! Every subcommand reads a strict JSON config, writes its outputs and a
//! `resolved_config.json` into `output_dir`, and prints a one-line JSON
//! summary. Exit codes: 0 on success, 1 for usage or config errors, 2 when
//! the numerics fail.

mod commands;
mod config;
mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub use commands::ConnectorFile;
pub use config::{default_net_inner, default_toy_optimizer, DataSpec, Landscape, LandscapeSpec};

#[derive(Debug, Parser)]
#[command(name = "wedgelab", version, about = "Loss-landscape geometry experiments")]
struct Cli {
    #[command(subcommand)]
    command: CommandName,

    /// JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Master seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Suppress progress notes on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, ValueEnum)]
pub enum CommandName {
    /// Minimizes from random starts and records trajectories.
    ToyOptimize,
    /// Optimizes inside random d-dimensional hyperplanes for each d.
    HyperplaneSweep,
    /// Builds a tunnel between two optima.
    Tunnel,
    /// Builds an m-connector among m + 1 optima.
    MConnector,
    /// Measures radial tunnel width around a low-loss point.
    ProbeWidth,
    /// Counts short directions from the Hessian spectrum.
    ShortDirs,
    /// Trains the tiny network and saves a checkpoint.
    TrainNet,
    /// Loss profile along a straight line or a saved connector.
    Barrier,
    /// Weight averaging versus prediction averaging of snapshots.
    SwaCompare,
    /// Cosine matrix of a saved connector's deviations.
    DeviationCosines,
    /// Label disagreement along a saved connector.
    PredictionProfile,
    /// Runs another subcommand over a grid of config values.
    Sweep,
}

impl CommandName {
    pub fn name(self) -> &'static str {
        match self {
            CommandName::ToyOptimize => "toy-optimize",
            CommandName::HyperplaneSweep => "hyperplane-sweep",
            CommandName::Tunnel => "tunnel",
            CommandName::MConnector => "m-connector",
            CommandName::ProbeWidth => "probe-width",
            CommandName::ShortDirs => "short-dirs",
            CommandName::TrainNet => "train-net",
            CommandName::Barrier => "barrier",
            CommandName::SwaCompare => "swa-compare",
            CommandName::DeviationCosines => "deviation-cosines",
            CommandName::PredictionProfile => "prediction-profile",
            CommandName::Sweep => "sweep",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(name, false).ok()
    }
}

/// Exit code for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match cli.jobs {
        Some(0) => Err(Error::Config("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))
            .and_then(|pool| pool.install(|| execute(&cli))),
        None => execute(&cli),
    };
    match outcome {
        Ok(summary) => {
            println!("{}", Value::Object(summary));
            0
        }
        Err(e) => {
            let code = exit_code(&e);
            let status = if code == 2 { "numerical_error" } else { "config_error" };
            let line = serde_json::json!({
                "command": cli.command.name(),
                "status": status,
                "error": e.to_string(),
            });
            println!("{line}");
            eprintln!("error: {e}");
            code
        }
    }
}

fn execute(cli: &Cli) -> Result<Map<String, Value>> {
    let mut value = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<Value>(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => Value::Object(Map::new()),
    };
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
    if let Some(seed) = cli.seed {
        obj.insert("seed".into(), seed.into());
    }
    if let Some(out) = &cli.output {
        obj.insert("output_dir".into(), Value::String(out.to_string_lossy().into_owned()));
    }
    let summary = run_command(cli.command, value)?;
    if !cli.quiet {
        let _ = writeln!(std::io::stderr(), "{}: done", cli.command.name());
    }
    Ok(summary)
}

/// Runs one command on a raw JSON config. Returns the summary object,
/// which always carries `command` and `status`.
pub fn run_command(command: CommandName, config: Value) -> Result<Map<String, Value>> {
    let mut summary = match command {
        CommandName::Sweep => sweep::run(config)?,
        other => commands::dispatch(other, config)?,
    };
    let mut out = Map::new();
    out.insert("command".into(), command.name().into());
    out.insert("status".into(), "ok".into());
    out.append(&mut summary);
    Ok(out)
}
