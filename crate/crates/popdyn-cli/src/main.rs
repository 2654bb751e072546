//! `popdyn`: density-dependent population processes from the command line.
//!
//! Every subcommand reads a JSON config, writes CSV/JSON artifacts plus a
//! run manifest into `--out`, and is bit-reproducible for a fixed config and
//! seed independent of `--threads`.

mod commands;
mod config;

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(name = "popdyn", version, about = "Simulate, analyze, and construct density-dependent population processes")]
struct Cli {
    /// JSON config file for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Master seed; overrides any seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Data-parallel width cap; defaults to available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate jump-process paths and ensemble statistics.
    Simulate,
    /// Integrate the mean-field ODE limit (and moment bounds for SIS).
    Meanfield,
    /// Measure sup-deviation from the mean-field limit across scales.
    Converge,
    /// Equilibria, neighborhood radius, and Lyapunov check for the scalar
    /// susceptible-fraction dynamics.
    Stability,
    /// Stationary, finite-horizon, or gap-experiment control workflows.
    Control,
    /// Realize a polynomial vector field as a population process.
    Construct {
        /// Built-in config; currently only "lorenz".
        #[arg(long)]
        preset: Option<String>,
    },
}

/// Errors split by exit code: config/validation failures exit 2, runtime
/// failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

pub type CliResult<T> = Result<T, CliError>;

pub fn cfg_err<E: Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

pub fn rt_err<E: Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Per-invocation context: output paths, seed resolution, manifest writing.
pub struct Ctx {
    pub out: PathBuf,
    pub command: &'static str,
    pub seed_flag: Option<u64>,
    config_path: Option<PathBuf>,
    /// Effective config as parsed JSON, echoed into the manifest.
    config_value: Option<serde_json::Value>,
}

impl Ctx {
    fn new(cli: &Cli, command: &'static str) -> Self {
        Ctx {
            out: cli.out.clone(),
            command,
            seed_flag: cli.seed,
            config_path: cli.config.clone(),
            config_value: None,
        }
    }

    /// Loads and schema-checks the config file.
    pub fn parse_config<T: DeserializeOwned>(&mut self) -> CliResult<T> {
        let path = self
            .config_path
            .as_ref()
            .ok_or_else(|| CliError::Config("--config is required".into()))?;
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let parsed: T = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        self.config_value = Some(serde_json::from_str(&text).map_err(cfg_err)?);
        Ok(parsed)
    }

    pub fn has_config_file(&self) -> bool {
        self.config_path.is_some()
    }

    /// Installs a preset config (used when no file is given).
    pub fn set_config_value(&mut self, value: serde_json::Value) {
        self.config_value = Some(value);
    }

    pub fn resolve_seed(&self, config_seed: Option<u64>) -> u64 {
        self.seed_flag.or(config_seed).unwrap_or(0)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn write_text(&self, name: &str, contents: &str) -> CliResult<()> {
        fs::write(self.path(name), contents)
            .map_err(|e| CliError::Runtime(format!("cannot write {name}: {e}")))
    }

    pub fn write_json<T: serde::Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(rt_err)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Records everything needed to reproduce the run bit-exactly.
    pub fn write_manifest(&self, seed: u64) -> CliResult<()> {
        let manifest = serde_json::json!({
            "tool": "popdyn",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "seed": seed,
            "config": self.config_value,
        });
        self.write_json("manifest.json", &manifest)
    }
}

/// Joins floats with the shortest round-trip decimal form.
pub fn csv_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Mean-field drift without the domain check, usable inside ODE trial steps
/// that probe just past the boundary.
pub fn drift_raw(model: &popdyn::PopulationModel, t: f64, x: &[f64], dx: &mut [f64]) {
    dx.fill(0.0);
    for ch in &model.channels {
        let r = ch.rate.eval(t, x);
        for (d, &j) in dx.iter_mut().zip(&ch.jump) {
            *d += j as f64 * r;
        }
    }
}

fn ensure_out_dir(out: &Path) -> CliResult<()> {
    fs::create_dir_all(out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(rt_err)?;
    }
    ensure_out_dir(&cli.out)?;
    match &cli.command {
        Command::Simulate => commands::simulate::run(Ctx::new(&cli, "simulate")),
        Command::Meanfield => commands::meanfield::run(Ctx::new(&cli, "meanfield")),
        Command::Converge => commands::converge::run(Ctx::new(&cli, "converge")),
        Command::Stability => commands::stability::run(Ctx::new(&cli, "stability")),
        Command::Control => commands::control::run(Ctx::new(&cli, "control")),
        Command::Construct { preset } => {
            commands::construct::run(Ctx::new(&cli, "construct"), preset.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
    }
}
