//! Batch front-end for the edgekit library.
//!
//! Subcommands: `detect` (edge maps per image), `weights` (freeze
//! dataset-level entropy weights), `evaluate` (PSNR/SSIM/AME report), and
//! `fuse-demo` (semantic gate over saved tensors). Exit code 0 means every
//! item succeeded, 1 means some detect items failed (see the index JSON),
//! and 2 means the run aborted.

mod commands;
mod config;
mod manifest;
mod report;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig, WeightMode};

#[derive(Parser)]
#[command(name = "edgekit", version, about = "Edge-guidance batch tools for SR evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the detector bank over a manifest of images.
    Detect {
        /// Run configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parallelism degree; 0 uses all cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Compute dataset-level entropy weights and freeze them to JSON.
    Weights {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Evaluate SR/GT pairs: PSNR, SSIM, per-detector edge losses, AME.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Frozen weights file; implies --mode frozen.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Weight source: compute per batch or load frozen.
        #[arg(long, value_enum)]
        mode: Option<WeightMode>,
    },
    /// Run the semantic gate on saved tensors and write the fused result.
    FuseDemo {
        /// Gate MLP weights (JSON).
        #[arg(long)]
        mlp: PathBuf,
        /// Semantic vector (JSON array).
        #[arg(long)]
        z_sem: PathBuf,
        /// First guidance tensor (latent container).
        #[arg(long)]
        f_c: PathBuf,
        /// Second guidance tensor (latent container).
        #[arg(long)]
        f_h: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli.command);
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            util::error(&format!("{e:#}"));
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> anyhow::Result<usize> {
    match command {
        Command::Detect { config, out, jobs } => {
            let cfg = RunConfig::load(&config, &Overrides { out, jobs, ..Default::default() })?;
            commands::cmd_detect(&cfg)
        }
        Command::Weights { config, out, jobs } => {
            let cfg = RunConfig::load(&config, &Overrides { out, jobs, ..Default::default() })?;
            commands::cmd_weights(&cfg)?;
            Ok(0)
        }
        Command::Evaluate {
            config,
            out,
            jobs,
            weights,
            mode,
        } => {
            let mode = mode.or(weights.as_ref().map(|_| WeightMode::Frozen));
            let cfg = RunConfig::load(
                &config,
                &Overrides {
                    out,
                    jobs,
                    weights,
                    mode,
                },
            )?;
            commands::cmd_evaluate(&cfg)?;
            Ok(0)
        }
        Command::FuseDemo {
            mlp,
            z_sem,
            f_c,
            f_h,
            out,
        } => {
            commands::cmd_fuse_demo(&mlp, &z_sem, &f_c, &f_h, &out)?;
            Ok(0)
        }
    }
}
