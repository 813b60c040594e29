//! Losses returning both the scalar value and `dL/dprediction`.

use super::Matrix;
use crate::error::{Error, Result};

/// Probabilities are clamped to `[PROB_EPS, 1 − PROB_EPS]` before taking logs.
pub const PROB_EPS: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    /// `dL/dprediction`, same shape as the prediction.
    pub grad: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    BinaryCrossEntropy,
    /// `½ · Σ (y − t)² / rows`; used to gradient-check non-probabilistic heads.
    HalfSquaredError,
}

impl Loss {
    pub fn evaluate(self, predicted: &Matrix, target: &Matrix) -> Result<LossValue> {
        match self {
            Loss::BinaryCrossEntropy => bce_loss(predicted, target),
            Loss::HalfSquaredError => half_squared_error(predicted, target),
        }
    }
}

/// Mean binary cross-entropy `−[t·ln p + (1−t)·ln(1−p)]` over all entries.
///
/// Predictions must lie in `[0, 1]`; they are clamped to
/// `[PROB_EPS, 1 − PROB_EPS]` and the gradient is taken at the clamped value.
pub fn bce_loss(predicted: &Matrix, target: &Matrix) -> Result<LossValue> {
    if predicted.shape() != target.shape() {
        return Err(Error::shape("bce_loss", predicted.shape(), target.shape()));
    }
    let n = predicted.data().len();
    if n == 0 {
        return Err(Error::Empty("bce_loss prediction"));
    }
    let inv_n = 1.0 / n as f64;
    let mut value = 0.0;
    let mut grad = Vec::with_capacity(n);
    for (&p, &t) in predicted.data().iter().zip(target.data()) {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain {
                op: "bce_loss",
                detail: format!("prediction {p} is not a probability"),
            });
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain {
                op: "bce_loss",
                detail: format!("target {t} is outside [0, 1]"),
            });
        }
        let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
        value -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
        grad.push((p - t) / (p * (1.0 - p)) * inv_n);
    }
    Ok(LossValue {
        value: value * inv_n,
        grad: Matrix::new(predicted.rows(), predicted.cols(), grad)?,
    })
}

pub fn half_squared_error(predicted: &Matrix, target: &Matrix) -> Result<LossValue> {
    if predicted.shape() != target.shape() {
        return Err(Error::shape("half_squared_error", predicted.shape(), target.shape()));
    }
    if predicted.rows() == 0 {
        return Err(Error::Empty("half_squared_error prediction"));
    }
    let inv_rows = 1.0 / predicted.rows() as f64;
    let diff: Vec<f64> = predicted
        .data()
        .iter()
        .zip(target.data())
        .map(|(y, t)| y - t)
        .collect();
    let value = 0.5 * diff.iter().map(|d| d * d).sum::<f64>() * inv_rows;
    let grad = diff.into_iter().map(|d| d * inv_rows).collect();
    Ok(LossValue {
        value,
        grad: Matrix::new(predicted.rows(), predicted.cols(), grad)?,
    })
}
