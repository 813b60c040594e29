//! `bigan`: preprocess NSL-KDD, train, evaluate and compare BiGAN detectors.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use bigan_core::TrainingMode;
use clap::{Parser, Subcommand};

use commands::Split;
use config::Flags;

#[derive(Debug, Parser)]
#[command(name = "bigan", version, about = "One-class BiGAN intrusion detection on NSL-KDD")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode the raw train/test files into cached datasets.
    Preprocess {
        /// KDDTrain+.txt
        #[arg(long)]
        train: PathBuf,
        /// KDDTest+.txt
        #[arg(long)]
        test: PathBuf,
        #[arg(long, default_value = "prepared")]
        out_dir: PathBuf,
    },
    /// Train a model on the normal training records.
    Train {
        /// Output directory of `preprocess`.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Repeat the run recorded in this manifest and check the checkpoint hash.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Score the test split with a trained checkpoint.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data_dir: PathBuf,
        /// Also write latent.csv with latent codes and two principal components.
        #[arg(long)]
        latent: bool,
        /// Record the report path in this manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Train and evaluate every mode, k and seed combination.
    Benchmark {
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
        seeds: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "5")]
        k_values: Vec<usize>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "generic-gan,standard-bigan,decoupled-bigan"
        )]
        modes: Vec<TrainingMode>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Write latent codes and their PCA projection as CSV.
    ExportLatent {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: Split,
        #[arg(long, default_value = "latent.csv")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess { train, test, out_dir } => commands::preprocess(&train, &test, &out_dir),
        Command::Train { data_dir, manifest, flags } => {
            commands::train_command(data_dir.as_deref(), flags, manifest.as_deref())
        }
        Command::Evaluate { checkpoint, data_dir, latent, manifest, flags } => {
            commands::evaluate_command(&checkpoint, &data_dir, flags, latent, manifest.as_deref())
        }
        Command::Benchmark { data_dir, seeds, k_values, modes, flags } => {
            commands::benchmark_command(&data_dir, flags, seeds, k_values, modes).map(drop)
        }
        Command::ExportLatent { checkpoint, data_dir, split, out } => {
            commands::export_command(&checkpoint, &data_dir, split, &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
