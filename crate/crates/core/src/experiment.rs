//! Seed sweeps over training modes and `k`, aggregated by median.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::EncodedDataset;
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalConfig};
use crate::model::{BiGanModel, ModelShape};
use crate::tensor::Matrix;
use crate::train::{train, TrainingConfig, TrainingMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunSpec {
    pub mode: TrainingMode,
    pub k_steps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub f1: f64,
    pub accuracy: f64,
    pub auc: Option<f64>,
    pub checkpoint_sha256: String,
    pub dloss: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub spec: RunSpec,
    /// Error text when the run failed.
    pub outcome: std::result::Result<RunMetrics, String>,
}

#[derive(Debug, Clone)]
pub struct BenchmarkPlan {
    pub modes: Vec<TrainingMode>,
    pub k_values: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Every field except mode, k and seed applies to all runs.
    pub base: TrainingConfig,
    pub shape: ModelShape,
    pub eval: EvalConfig,
    /// Worker threads; 0 uses rayon's default.
    pub jobs: usize,
}

impl BenchmarkPlan {
    /// Cartesian product, mode-major, then `k`, then seed.
    pub fn specs(&self) -> Vec<RunSpec> {
        let mut out = Vec::new();
        for &mode in &self.modes {
            for &k_steps in &self.k_values {
                for &seed in &self.seeds {
                    out.push(RunSpec { mode, k_steps, seed });
                }
            }
        }
        out
    }
}

/// Trains and evaluates one configuration. The seed drives both parameter
/// initialisation and training.
pub fn run_one(
    spec: RunSpec,
    plan: &BenchmarkPlan,
    train_rows: &Matrix,
    test: &EncodedDataset,
) -> Result<RunMetrics> {
    let config = TrainingConfig {
        mode: spec.mode,
        k_steps: spec.k_steps,
        seed: spec.seed,
        ..plan.base.clone()
    };
    let model = BiGanModel::init(plan.shape.clone(), spec.seed)?;
    let out = train(model, train_rows, &config)?;
    let report = evaluate(&out.model, test, &plan.eval)?;
    Ok(RunMetrics {
        f1: report.f1,
        accuracy: report.accuracy,
        auc: report.auc,
        checkpoint_sha256: report.checkpoint_sha256,
        dloss: out.state.trace.discriminator,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        Some(Self {
            median: median(values)?,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Middle value, or the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRow {
    pub mode: TrainingMode,
    pub k_steps: usize,
    pub runs: usize,
    pub failures: usize,
    pub f1: Option<Summary>,
    pub accuracy: Option<Summary>,
    pub auc: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub runs: Vec<RunResult>,
    pub rows: Vec<ConfigRow>,
}

impl BenchmarkReport {
    fn aggregate(runs: Vec<RunResult>) -> Self {
        let mut keys: Vec<(TrainingMode, usize)> = Vec::new();
        for r in &runs {
            let key = (r.spec.mode, r.spec.k_steps);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let rows = keys
            .into_iter()
            .map(|(mode, k_steps)| {
                let group: Vec<&RunResult> = runs
                    .iter()
                    .filter(|r| r.spec.mode == mode && r.spec.k_steps == k_steps)
                    .collect();
                let ok: Vec<&RunMetrics> =
                    group.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
                let f1: Vec<f64> = ok.iter().map(|m| m.f1).collect();
                let acc: Vec<f64> = ok.iter().map(|m| m.accuracy).collect();
                let auc: Vec<f64> = ok.iter().filter_map(|m| m.auc).collect();
                ConfigRow {
                    mode,
                    k_steps,
                    runs: group.len(),
                    failures: group.len() - ok.len(),
                    f1: Summary::of(&f1),
                    accuracy: Summary::of(&acc),
                    auc: Summary::of(&auc),
                }
            })
            .collect();
        Self { runs, rows }
    }

    pub fn row(&self, mode: TrainingMode, k_steps: usize) -> Option<&ConfigRow> {
        self.rows.iter().find(|r| r.mode == mode && r.k_steps == k_steps)
    }

    /// Fixed-width text table, one line per configuration.
    pub fn table(&self) -> String {
        let cell = |s: &Option<Summary>| match s {
            Some(s) => format!("{:.4} [{:.4}, {:.4}]", s.median, s.min, s.max),
            None => "-".to_string(),
        };
        let mut out = format!(
            "{:<16} {:>3} {:>4} {:>4}  {:<26} {:<26} {:<26}\n",
            "mode", "k", "runs", "fail", "median_f1 [min, max]", "median_acc [min, max]", "median_auc [min, max]"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<16} {:>3} {:>4} {:>4}  {:<26} {:<26} {:<26}",
                r.mode.as_str(),
                r.k_steps,
                r.runs,
                r.failures,
                cell(&r.f1),
                cell(&r.accuracy),
                cell(&r.auc)
            );
        }
        out
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

/// Runs every configuration in `plan` on up to `plan.jobs` threads. Failed runs are
/// recorded and do not stop the others.
pub fn run_benchmark(
    plan: &BenchmarkPlan,
    train_rows: &Matrix,
    test: &EncodedDataset,
) -> Result<BenchmarkReport> {
    plan.base.validate()?;
    plan.eval.validate()?;
    let specs = plan.specs();
    if specs.is_empty() {
        return Err(Error::Config("benchmark has no runs".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let runs = pool.install(|| {
        specs
            .par_iter()
            .map(|&spec| RunResult {
                spec,
                outcome: run_one(spec, plan, train_rows, test).map_err(|e| e.to_string()),
            })
            .collect::<Vec<_>>()
    });
    Ok(BenchmarkReport::aggregate(runs))
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Some((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt())
}

/// Spread of a loss trace early and late in training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub early_std: f64,
    pub late_std: f64,
}

impl Stability {
    /// Standard deviation over the first `early` and the last `late` entries.
    pub fn of(trace: &[f64], early: usize, late: usize) -> Option<Self> {
        if early == 0 || late == 0 || trace.len() < early.max(late) {
            return None;
        }
        Some(Self {
            early_std: std_dev(&trace[..early])?,
            late_std: std_dev(&trace[trace.len() - late..])?,
        })
    }

    pub fn settled(&self) -> bool {
        self.late_std < self.early_std
    }
}
