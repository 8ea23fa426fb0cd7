//! `vne`: generate topologies and workloads, run embedding simulations,
//! embed one request, and regenerate reports from run logs.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 embedding
//! rejection (from `embed`).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vne_core::pso::RejectReason;
use vne_core::sim::EmbedderKind;
use vne_core::VneError;

mod commands;
mod config;

use config::ExperimentConfig;

#[derive(Debug)]
pub struct CliError {
    message: String,
    rejected: bool,
}

impl CliError {
    pub fn input(message: String) -> Self {
        Self {
            message,
            rejected: false,
        }
    }

    pub fn rejected(reason: RejectReason) -> Self {
        Self {
            message: format!("embedding rejected: {}", reason),
            rejected: true,
        }
    }

    fn code(&self) -> u8 {
        if self.rejected {
            3
        } else {
            2
        }
    }
}

impl From<VneError> for CliError {
    fn from(e: VneError) -> Self {
        Self::input(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "vne",
    about = "Energy-aware virtual network embedding: topology generation, simulation, and reporting",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a substrate, the virtual network files, and the workload
    /// index in BRITE/CSV form.
    Generate {
        /// Experiment configuration (TOML); defaults reproduce the
        /// standard protocol.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a workload against a substrate and write metrics + log.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Embedder: eapso, greedy or distributed.
        #[arg(long)]
        embedder: Option<String>,
        /// Run this many consecutive seeds.
        #[arg(long, default_value_t = 1)]
        seeds: u32,
        /// Metric bucket width in time units.
        #[arg(long)]
        bucket: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embed one virtual network file onto one substrate file.
    Embed {
        #[arg(long)]
        substrate: PathBuf,
        #[arg(long)]
        vn: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Embedder: eapso or greedy.
        #[arg(long)]
        embedder: Option<String>,
        /// Lifetime used for energy/cost accounting.
        #[arg(long, default_value_t = 500.0)]
        lifetime: f64,
        /// Write the embedding JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild the metric series and a summary table from a run log.
    Report {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        bucket: Option<f64>,
        /// Directory for report.csv / report.txt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { config, seed, out } => {
            let mut cfg = ExperimentConfig::load(config.as_deref())?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let out = out.unwrap_or_else(|| cfg.out_dir.clone());
            commands::cmd_generate(&cfg, &out)
        }
        Command::Simulate {
            config,
            seed,
            embedder,
            seeds,
            bucket,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(config.as_deref())?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(width) = bucket {
                if width <= 0.0 {
                    return Err(CliError::input("--bucket must be positive".into()));
                }
                cfg.bucket_width = width;
            }
            let kind = match embedder {
                Some(name) => name.parse::<EmbedderKind>().map_err(CliError::from)?,
                None => cfg.embedder.kind()?,
            };
            let out = out.unwrap_or_else(|| cfg.out_dir.clone());
            commands::cmd_simulate(&cfg, kind, seeds, &out)
        }
        Command::Embed {
            substrate,
            vn,
            config,
            seed,
            embedder,
            lifetime,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(config.as_deref())?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let kind = match embedder {
                Some(name) => name.parse::<EmbedderKind>().map_err(CliError::from)?,
                None => cfg.embedder.kind()?,
            };
            commands::cmd_embed(&cfg, &substrate, &vn, lifetime, kind, out.as_deref())
        }
        Command::Report { log, bucket, out } => commands::cmd_report(&log, bucket, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code())
        }
    }
}
