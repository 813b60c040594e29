//! One-class classification with a trained encoder and discriminator, plus
//! metrics and exports.
//!
//! A sample `x` is scored as `O = D([x, E(x)])` and called anomalous iff
//! `O > κ`. No separate anomaly score is involved: the discriminator output is
//! the decision.

mod metrics;
mod pca;
mod roc;

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use metrics::{
    accuracy, f1, false_positive_rate, precision, recall, ConfusionMatrix, Metrics, Rate,
};
pub use pca::{pca_project, Pca};
pub use roc::{auc_roc, roc_curve, trapezoid_area, write_roc_csv, RocPoint};

use crate::data::EncodedDataset;
use crate::error::{Error, Result};
use crate::model::BiGanModel;
use crate::tensor::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub threshold: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { threshold: 0.5 }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!(
                "threshold must lie strictly between 0 and 1, got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

const SCORE_CHUNK: usize = 2048;

/// `D([x, E(x)])` for every row of `features`.
pub fn score(model: &BiGanModel, features: &Matrix) -> Result<Vec<f64>> {
    if features.cols() != model.feature_width() {
        return Err(Error::Config(format!(
            "data has {} features but the model expects {}",
            features.cols(),
            model.feature_width()
        )));
    }
    let starts: Vec<usize> = (0..features.rows()).step_by(SCORE_CHUNK).collect();
    let chunks = starts
        .par_iter()
        .map(|&start| {
            let end = (start + SCORE_CHUNK).min(features.rows());
            let rows: Vec<usize> = (start..end).collect();
            let x = features.select_rows(&rows)?;
            Ok(model.discriminate(&model.real_pair(&x)?)?.into_data())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.concat())
}

/// 1 (anomaly) iff the probability is strictly above `threshold`.
pub fn predict(probabilities: &[f64], threshold: f64) -> Vec<u8> {
    probabilities
        .iter()
        .map(|&p| u8::from(p > threshold))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub probabilities: Vec<f64>,
    pub predictions: Vec<u8>,
}

pub fn classify(
    model: &BiGanModel,
    dataset: &EncodedDataset,
    config: &EvalConfig,
) -> Result<Classification> {
    config.validate()?;
    let probabilities = score(model, &dataset.features)?;
    let predictions = predict(&probabilities, config.threshold);
    Ok(Classification {
        probabilities,
        predictions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub samples: usize,
    pub threshold: f64,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `None` when only one class is present.
    pub auc: Option<f64>,
    /// Metrics whose denominator was zero and which are reported as 0.
    pub undefined_metrics: Vec<String>,
    pub checkpoint_sha256: String,
    pub probabilities: Vec<f64>,
}

impl EvalReport {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Classifies `dataset` and computes every metric.
pub fn evaluate(
    model: &BiGanModel,
    dataset: &EncodedDataset,
    config: &EvalConfig,
) -> Result<EvalReport> {
    let c = classify(model, dataset, config)?;
    let confusion = ConfusionMatrix::from_predictions(&c.predictions, &dataset.labels)?;
    let m = Metrics::from_confusion(&confusion);
    let both_classes = dataset.labels.contains(&0) && dataset.labels.contains(&1);
    let auc = if both_classes {
        Some(auc_roc(&c.probabilities, &dataset.labels)?)
    } else {
        None
    };
    Ok(EvalReport {
        samples: dataset.len(),
        threshold: config.threshold,
        confusion,
        accuracy: m.accuracy,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        auc,
        undefined_metrics: m.undefined,
        checkpoint_sha256: model.checkpoint_hash(),
        probabilities: c.probabilities,
    })
}

/// Latent codes, labels and their 2-D PCA coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentExport {
    pub labels: Vec<u8>,
    pub latent: Matrix,
    /// `rows × 2`; columns beyond the data's rank are zero.
    pub pcs: Matrix,
    pub rank_deficient: bool,
}

impl LatentExport {
    pub fn compute(model: &BiGanModel, dataset: &EncodedDataset) -> Result<Self> {
        let latent = model.latent_for(&dataset.features)?;
        let n = latent.rows();
        let mut pcs = Matrix::zeros(n, 2);
        let mut rank_deficient = true;
        if n >= 2 && latent.cols() >= 2 {
            let pca = pca_project(&latent, 2)?;
            for r in 0..n {
                for c in 0..pca.projected.cols() {
                    pcs.set(r, c, pca.projected.get(r, c));
                }
            }
            rank_deficient = pca.rank_deficient;
        }
        Ok(Self {
            labels: dataset.labels.clone(),
            latent,
            pcs,
            rank_deficient,
        })
    }

    /// Header `label,z1..zd,pc1,pc2`, then one row per sample.
    pub fn to_csv(&self) -> String {
        let d = self.latent.cols();
        let mut out = String::from("label");
        for i in 1..=d {
            out.push_str(&format!(",z{i}"));
        }
        out.push_str(",pc1,pc2\n");
        for r in 0..self.labels.len() {
            out.push_str(&self.labels[r].to_string());
            for v in self.latent.row(r).iter().chain(self.pcs.row(r)) {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub fn export_latent(
    model: &BiGanModel,
    dataset: &EncodedDataset,
    path: impl AsRef<Path>,
) -> Result<LatentExport> {
    let export = LatentExport::compute(model, dataset)?;
    fs::write(path, export.to_csv())?;
    Ok(export)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Provenance;
    use crate::model::ModelShape;
    use crate::tensor::{Activation, DenseLayer};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dataset(n: usize, seed: u64) -> EncodedDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..n * 9).map(|_| rng.random_range(0.0..1.0)).collect();
        let labels = (0..n).map(|i| (i % 3 == 0) as u8).collect();
        EncodedDataset::new(Matrix::new(n, 9, v).unwrap(), labels, Provenance::Test).unwrap()
    }

    fn model() -> BiGanModel {
        let shape = ModelShape {
            feature_width: 9,
            latent_dim: 3,
            hidden_widths: vec![6],
            discriminator_hidden: 5,
        };
        BiGanModel::init(shape, 4).unwrap()
    }

    #[test]
    fn strict_threshold() {
        assert_eq!(predict(&[0.7, 0.5, 0.3, 0.500001], 0.5), vec![1, 0, 0, 1]);
    }

    #[test]
    fn threshold_validation() {
        for t in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(EvalConfig { threshold: t }.validate().is_err());
        }
        assert!(EvalConfig::default().validate().is_ok());
    }

    #[test]
    fn classify_shapes_and_width_check() {
        let ds = dataset(50, 1);
        let c = classify(&model(), &ds, &EvalConfig::default()).unwrap();
        assert_eq!(c.predictions.len(), 50);
        assert!(c.probabilities.iter().all(|&p| p > 0.0 && p < 1.0));

        let wide = EncodedDataset::new(Matrix::zeros(2, 10), vec![0, 1], Provenance::Test).unwrap();
        let err = classify(&model(), &wide, &EvalConfig::default()).unwrap_err();
        assert!(err.to_string().contains("10 features"));
    }

    #[test]
    fn scores_match_direct_forward_across_chunks() {
        let ds = dataset(SCORE_CHUNK + 17, 2);
        let m = model();
        let direct = m.discriminate(&m.real_pair(&ds.features).unwrap()).unwrap();
        assert_eq!(score(&m, &ds.features).unwrap(), direct.into_data());
    }

    #[test]
    fn neutral_discriminator_calls_everything_normal() {
        let mut m = model();
        let out = &mut m.discriminator.layers_mut()[1];
        *out = DenseLayer::zeros(out.fan_in(), 1, Activation::Sigmoid);
        let ds = dataset(30, 3);
        let r = evaluate(&m, &ds, &EvalConfig::default()).unwrap();
        assert_eq!(r.confusion.tp + r.confusion.fp, 0);
        assert_eq!(r.auc, Some(0.5));
        assert!(r.undefined_metrics.contains(&"precision".to_string()));
    }

    #[test]
    fn report_is_repeatable_and_round_trips() {
        let ds = dataset(40, 5);
        let m = model();
        let a = evaluate(&m, &ds, &EvalConfig::default()).unwrap();
        let b = evaluate(&m, &ds, &EvalConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.confusion.total(), 40);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        a.write_json(&path).unwrap();
        assert_eq!(EvalReport::read_json(&path).unwrap(), a);
    }

    #[test]
    fn single_class_report_has_no_auc() {
        let mut ds = dataset(10, 6);
        ds.labels = vec![0; 10];
        assert_eq!(evaluate(&model(), &ds, &EvalConfig::default()).unwrap().auc, None);
    }

    #[test]
    fn latent_export_layout() {
        let ds = dataset(25, 7);
        let m = model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("latent.csv");
        let e = export_latent(&m, &ds, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "label,z1,z2,z3,pc1,pc2");
        assert_eq!(lines.len(), 26);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 3 + 2 + 1));
        assert_eq!(e.latent, m.encode(&ds.features).unwrap());
        export_latent(&m, &ds, dir.path().join("again.csv")).unwrap();
        assert_eq!(fs::read(dir.path().join("again.csv")).unwrap(), fs::read(&path).unwrap());
    }

    #[test]
    fn disabled_encoder_exports_zero_codes() {
        let mut m = model();
        m.encoder_enabled = false;
        let e = LatentExport::compute(&m, &dataset(10, 1)).unwrap();
        assert!(e.rank_deficient);
        assert!(e.latent.data().iter().chain(e.pcs.data()).all(|&v| v == 0.0));
    }

    proptest! {
        #[test]
        fn positive_count_is_monotone_in_threshold(
            probs in prop::collection::vec(0.0f64..=1.0, 1..80),
            a in 0.001f64..0.999,
            b in 0.001f64..0.999,
        ) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let count = |t| predict(&probs, t).iter().filter(|&&p| p == 1).count();
            prop_assert!(count(lo) >= count(hi));
            let interior: Vec<f64> = probs.iter().map(|p| p.clamp(1e-6, 1.0 - 1e-6)).collect();
            prop_assert!(predict(&interior, 1e-9).iter().all(|&p| p == 1));
            prop_assert!(predict(&interior, 1.0 - 1e-9).iter().all(|&p| p == 0));
        }
    }
}
