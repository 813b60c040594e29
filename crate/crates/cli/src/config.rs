//! Run settings from flags, an optional `key=value` file, and defaults, in
//! that order of precedence.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bigan_core::eval::EvalConfig;
use bigan_core::{ModelShape, TrainingConfig, TrainingMode};
use clap::Args;

#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Flags {
    /// Minibatch size.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Adam step size.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Outer training iterations.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Inner steps per iteration (meaning depends on --mode).
    #[arg(long)]
    pub k_steps: Option<usize>,
    /// generic-gan, standard-bigan or decoupled-bigan.
    #[arg(long)]
    pub mode: Option<TrainingMode>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub latent_dim: Option<usize>,
    /// Encoder hidden widths, comma-separated; the generator mirrors them.
    #[arg(long, value_delimiter = ',')]
    pub hidden_widths: Option<Vec<usize>>,
    /// Probabilities strictly above this are anomalies.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Parallel runs for benchmark.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Where artifacts are written.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Flat `key=value` file with the same keys as these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow::anyhow!("line {line}: bad value {value:?} for {key}: {e}"))
}

impl Flags {
    /// Parses a config file body. Blank lines and `#` comments are ignored;
    /// `-` and `_` are interchangeable in keys.
    pub fn from_config_text(text: &str) -> Result<Self> {
        let mut f = Flags::default();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {n}: expected key=value, got {line:?}");
            };
            let key = key.trim().replace('_', "-");
            let value = value.trim();
            match key.as_str() {
                "batch-size" => f.batch_size = Some(parse(&key, value, n)?),
                "learning-rate" => f.learning_rate = Some(parse(&key, value, n)?),
                "iterations" => f.iterations = Some(parse(&key, value, n)?),
                "k-steps" => f.k_steps = Some(parse(&key, value, n)?),
                "mode" => f.mode = Some(parse(&key, value, n)?),
                "seed" => f.seed = Some(parse(&key, value, n)?),
                "latent-dim" => f.latent_dim = Some(parse(&key, value, n)?),
                "hidden-widths" => {
                    f.hidden_widths = Some(
                        value
                            .split(',')
                            .map(|w| parse(&key, w.trim(), n))
                            .collect::<Result<_>>()?,
                    )
                }
                "threshold" => f.threshold = Some(parse(&key, value, n)?),
                "jobs" => f.jobs = Some(parse(&key, value, n)?),
                "out-dir" => f.out_dir = Some(PathBuf::from(value)),
                other => bail!("line {n}: unknown key {other:?}"),
            }
        }
        Ok(f)
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::from_config_text(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Field-wise: values set here win over `fallback`.
    pub fn or(self, fallback: Flags) -> Flags {
        Flags {
            batch_size: self.batch_size.or(fallback.batch_size),
            learning_rate: self.learning_rate.or(fallback.learning_rate),
            iterations: self.iterations.or(fallback.iterations),
            k_steps: self.k_steps.or(fallback.k_steps),
            mode: self.mode.or(fallback.mode),
            seed: self.seed.or(fallback.seed),
            latent_dim: self.latent_dim.or(fallback.latent_dim),
            hidden_widths: self.hidden_widths.or(fallback.hidden_widths),
            threshold: self.threshold.or(fallback.threshold),
            jobs: self.jobs.or(fallback.jobs),
            out_dir: self.out_dir.or(fallback.out_dir),
            config: self.config.or(fallback.config),
        }
    }

    /// Merges in the config file named by `--config`, then fills defaults.
    pub fn resolve(self) -> Result<Settings> {
        let merged = match &self.config {
            Some(path) => {
                let file = Flags::from_config_file(path)?;
                self.or(file)
            }
            None => self,
        };
        Settings::from_flags(merged)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub training: TrainingConfig,
    pub latent_dim: usize,
    pub hidden_widths: Vec<usize>,
    pub eval: EvalConfig,
    pub jobs: usize,
    pub out_dir: PathBuf,
}

impl Settings {
    fn from_flags(f: Flags) -> Result<Self> {
        let d = TrainingConfig::default();
        let shape = ModelShape::default();
        let training = TrainingConfig {
            batch_size: f.batch_size.unwrap_or(d.batch_size),
            learning_rate: f.learning_rate.unwrap_or(d.learning_rate),
            iterations: f.iterations.unwrap_or(d.iterations),
            k_steps: f.k_steps.unwrap_or(d.k_steps),
            mode: f.mode.unwrap_or(d.mode),
            seed: f.seed.unwrap_or(d.seed),
            ..d
        };
        training.validate()?;
        let eval = EvalConfig {
            threshold: f.threshold.unwrap_or(EvalConfig::default().threshold),
        };
        eval.validate()?;
        let hidden_widths = f.hidden_widths.unwrap_or(shape.hidden_widths);
        if hidden_widths.is_empty() {
            bail!("hidden-widths needs at least one width");
        }
        Ok(Self {
            training,
            latent_dim: f.latent_dim.unwrap_or(shape.latent_dim),
            hidden_widths,
            eval,
            jobs: f.jobs.unwrap_or(0),
            out_dir: f.out_dir.unwrap_or_else(|| PathBuf::from("out")),
        })
    }

    /// The discriminator's hidden layer takes the first encoder width.
    pub fn shape(&self, feature_width: usize) -> ModelShape {
        ModelShape {
            feature_width,
            latent_dim: self.latent_dim,
            hidden_widths: self.hidden_widths.clone(),
            discriminator_hidden: self.hidden_widths[0],
        }
    }
}
