//! `exciton`: run exciton phase-control experiments from TOML configs.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod experiments;
mod output;
mod presets;
mod units;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{load, Loaded, Sources};
use error::{CliError, Result};
use output::Artifacts;

#[derive(Parser)]
#[command(name = "exciton", version, about = "Coherent control of Frenkel excitons in molecular lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts plus a manifest.
    Run {
        #[command(flatten)]
        source: SourceArgs,
        /// Output directory (may also be set as `output` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for ensemble runs (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check a configuration without running it.
    Validate {
        #[command(flatten)]
        source: SourceArgs,
    },
    /// List the built-in figure presets.
    ListPresets {
        /// Print the TOML of one preset.
        #[arg(long, value_name = "NAME")]
        show: Option<String>,
    },
}

#[derive(Args)]
struct SourceArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset to start from.
    #[arg(long)]
    preset: Option<String>,
    /// Seed for vacancy sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Local error tolerance of the pulsed integrator.
    #[arg(long)]
    tolerance: Option<f64>,
}

impl SourceArgs {
    fn sources(&self, output: Option<PathBuf>) -> Sources {
        Sources {
            config: self.config.clone(),
            preset: self.preset.clone(),
            seed: self.seed,
            tolerance: self.tolerance,
            output,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { source, out, jobs } => {
            let loaded = load(&source.sources(out))?;
            if let Some(j) = jobs {
                if j == 0 {
                    return Err(CliError::config("--jobs", "must be at least 1"));
                }
                // ignore a second initialization in the same process
                let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
            }
            run(&loaded)
        }
        Command::Validate { source } => {
            let loaded = load(&source.sources(None))?;
            println!(
                "ok: experiment `{}`{}",
                loaded.config.experiment.name(),
                loaded.preset.as_deref().map(|p| format!(" from preset `{p}`")).unwrap_or_default()
            );
            Ok(())
        }
        Command::ListPresets { show: Some(name) } => {
            let text = presets::source(&name).ok_or_else(|| {
                CliError::config("preset", format!("unknown preset `{name}`; available: {}", presets::names().join(", ")))
            })?;
            print!("{text}");
            Ok(())
        }
        Command::ListPresets { show: None } => {
            for (name, description) in presets::catalog() {
                println!("{name:<6} {description}");
            }
            Ok(())
        }
    }
}

fn run(loaded: &Loaded) -> Result<()> {
    let c = &loaded.config;
    let dir = c
        .output
        .clone()
        .ok_or_else(|| CliError::config("output", "missing output directory; pass --out DIR"))?;
    let mut out = Artifacts::create(&dir)?;
    out.json("config.resolved.json", &loaded.resolved)?;
    experiments::run(c, &mut out)?;
    let files = out.finish(c.experiment.name(), loaded.preset.as_deref(), c.seed)?;
    println!("wrote {} files to {}", files.len() + 1, dir.display());
    Ok(())
}
