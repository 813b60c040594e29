use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts with anomalies as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    /// `predictions` and `labels` use 1 for anomaly, 0 for normal.
    pub fn from_predictions(predictions: &[u8], labels: &[u8]) -> Result<Self> {
        if predictions.len() != labels.len() {
            return Err(Error::shape(
                "confusion",
                (predictions.len(), 1),
                (labels.len(), 1),
            ));
        }
        let mut cm = Self::default();
        for (&p, &l) in predictions.iter().zip(labels) {
            match (p, l) {
                (1, 1) => cm.tp += 1,
                (0, 0) => cm.tn += 1,
                (1, 0) => cm.fp += 1,
                (0, 1) => cm.fn_ += 1,
                _ => {
                    return Err(Error::Domain {
                        op: "confusion",
                        detail: format!("prediction {p} / label {l} is not binary"),
                    })
                }
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// A ratio that is reported as 0 with `undefined` set when its denominator
/// is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub value: f64,
    pub undefined: bool,
}

impl Rate {
    fn ratio(num: f64, den: f64) -> Self {
        if den == 0.0 {
            Self {
                value: 0.0,
                undefined: true,
            }
        } else {
            Self {
                value: num / den,
                undefined: false,
            }
        }
    }
}

pub fn accuracy(cm: &ConfusionMatrix) -> Rate {
    Rate::ratio((cm.tp + cm.tn) as f64, cm.total() as f64)
}

pub fn precision(cm: &ConfusionMatrix) -> Rate {
    Rate::ratio(cm.tp as f64, (cm.tp + cm.fp) as f64)
}

/// True positive rate.
pub fn recall(cm: &ConfusionMatrix) -> Rate {
    Rate::ratio(cm.tp as f64, (cm.tp + cm.fn_) as f64)
}

pub fn false_positive_rate(cm: &ConfusionMatrix) -> Rate {
    Rate::ratio(cm.fp as f64, (cm.fp + cm.tn) as f64)
}

/// Harmonic mean of [`precision`] and [`recall`].
pub fn f1(cm: &ConfusionMatrix) -> Rate {
    let p = precision(cm);
    let r = recall(cm);
    let mut out = Rate::ratio(2.0 * p.value * r.value, p.value + r.value);
    out.undefined |= p.undefined || r.undefined;
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Names of metrics whose denominator was zero (reported as 0).
    pub undefined: Vec<String>,
}

impl Metrics {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Self {
        let rates = [
            ("accuracy", accuracy(cm)),
            ("precision", precision(cm)),
            ("recall", recall(cm)),
            ("f1", f1(cm)),
        ];
        Self {
            accuracy: rates[0].1.value,
            precision: rates[1].1.value,
            recall: rates[2].1.value,
            f1: rates[3].1.value,
            undefined: rates
                .iter()
                .filter(|(_, r)| r.undefined)
                .map(|(n, _)| n.to_string())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counts_follow_anomaly_as_positive() {
        let cm = ConfusionMatrix::from_predictions(&[1, 1, 0, 0, 1], &[1, 0, 0, 1, 1]).unwrap();
        assert_eq!(cm, ConfusionMatrix { tp: 2, tn: 1, fp: 1, fn_: 1 });
        assert_eq!(cm.total(), 5);
    }

    #[test]
    fn all_correct() {
        let labels = [0, 1, 1, 0];
        let cm = ConfusionMatrix::from_predictions(&labels, &labels).unwrap();
        assert_eq!((cm.fp, cm.fn_), (0, 0));
        let m = Metrics::from_confusion(&ConfusionMatrix { tp: 1, tn: 1, fp: 0, fn_: 0 });
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
        assert!(m.undefined.is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ConfusionMatrix::from_predictions(&[0, 1], &[0]).is_err());
        assert!(ConfusionMatrix::from_predictions(&[2], &[0]).is_err());
    }

    #[test]
    fn degenerate_denominators_are_flagged() {
        let cm = ConfusionMatrix { tp: 0, tn: 5, fp: 0, fn_: 3 };
        let p = precision(&cm);
        assert_eq!((p.value, p.undefined), (0.0, true));
        let m = Metrics::from_confusion(&cm);
        assert_eq!(m.undefined, vec!["precision".to_string(), "f1".to_string()]);
        assert_eq!(m.recall, 0.0);
        assert!(Metrics::from_confusion(&ConfusionMatrix::default()).undefined.contains(&"accuracy".into()));
    }

    #[test]
    fn serialises_fn_field() {
        let json = serde_json::to_string(&ConfusionMatrix { tp: 1, tn: 2, fp: 3, fn_: 4 }).unwrap();
        assert_eq!(json, r#"{"tp":1,"tn":2,"fp":3,"fn":4}"#);
    }

    proptest! {
        #[test]
        fn rates_are_consistent(tp in 0u64..10_000, tn in 0u64..10_000, fp in 0u64..10_000, fn_ in 0u64..10_000) {
            let cm = ConfusionMatrix { tp, tn, fp, fn_ };
            let m = Metrics::from_confusion(&cm);
            let n = cm.total();
            if n > 0 {
                prop_assert!((m.accuracy - (tp + tn) as f64 / n as f64).abs() < 1e-15);
            }
            for v in [m.accuracy, m.precision, m.recall, m.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            if m.precision + m.recall > 0.0 {
                let h = 2.0 * m.precision * m.recall / (m.precision + m.recall);
                prop_assert!((m.f1 - h).abs() < 1e-12);
            }
        }
    }
}
