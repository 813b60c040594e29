//! Central finite-difference verification of analytic gradients.

use super::{Loss, Matrix, Network, NetworkGrads};
use crate::error::{Error, Result};

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// `|a − b| / max(|a|, |b|, 1e-8)`.
#[inline]
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub max_relative_error: f64,
    /// `(buffer, index)` of the worst parameter, buffers ordered W₀, b₀, W₁, …
    pub worst: Option<(usize, usize)>,
    pub parameters: usize,
}

impl GradCheck {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_relative_error < tolerance
    }
}

/// Max relative error between two equally shaped gradient lists.
pub fn compare_gradients(a: &[&[f64]], b: &[&[f64]]) -> Result<GradCheck> {
    if a.len() != b.len() {
        return Err(Error::shape("compare_gradients", (a.len(), 0), (b.len(), 0)));
    }
    let mut report = GradCheck {
        max_relative_error: 0.0,
        worst: None,
        parameters: 0,
    };
    for (bi, (x, y)) in a.iter().zip(b).enumerate() {
        if x.len() != y.len() {
            return Err(Error::shape("compare_gradients", (x.len(), 1), (y.len(), 1)));
        }
        for (i, (&u, &v)) in x.iter().zip(y.iter()).enumerate() {
            let e = relative_error(u, v);
            report.parameters += 1;
            if e > report.max_relative_error || report.worst.is_none() {
                report.max_relative_error = report.max_relative_error.max(e);
                report.worst = Some((bi, i));
            }
        }
    }
    Ok(report)
}

fn param_mut(net: &mut Network, buffer: usize, index: usize) -> &mut f64 {
    let layer = &mut net.layers_mut()[buffer / 2];
    if buffer.is_multiple_of(2) {
        &mut layer.weights.data_mut()[index]
    } else {
        &mut layer.bias[index]
    }
}

/// Numeric gradient of `loss` with respect to every parameter of `net`.
///
/// Each parameter is perturbed by `±step` and restored bit-exactly afterwards.
pub fn numeric_gradients<F>(net: &mut Network, step: f64, mut loss: F) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&Network) -> Result<f64>,
{
    let lens: Vec<usize> = net.param_slices().iter().map(|s| s.len()).collect();
    let mut out = Vec::with_capacity(lens.len());
    for (b, &len) in lens.iter().enumerate() {
        let mut grads = Vec::with_capacity(len);
        for i in 0..len {
            let original = *param_mut(net, b, i);
            *param_mut(net, b, i) = original + step;
            let up = loss(net);
            *param_mut(net, b, i) = original - step;
            let down = loss(net);
            *param_mut(net, b, i) = original;
            grads.push((up? - down?) / (2.0 * step));
        }
        out.push(grads);
    }
    Ok(out)
}

/// Compares `analytic` against central differences of `loss` around `net`.
pub fn finite_difference_check<F>(
    net: &mut Network,
    analytic: &NetworkGrads,
    step: f64,
    loss: F,
) -> Result<GradCheck>
where
    F: FnMut(&Network) -> Result<f64>,
{
    let numeric = numeric_gradients(net, step, loss)?;
    let numeric: Vec<&[f64]> = numeric.iter().map(Vec::as_slice).collect();
    compare_gradients(&analytic.slices(), &numeric)
}

/// Backprop vs finite differences for `loss(network(input), target)`.
pub fn grad_check(
    network: &Network,
    input: &Matrix,
    target: &Matrix,
    loss: Loss,
) -> Result<GradCheck> {
    let mut net = network.clone();
    let out = net.forward_cached(input)?;
    let value = loss.evaluate(&out, target)?;
    let analytic = net.backward(&value.grad)?.grads;
    finite_difference_check(&mut net, &analytic, FD_STEP, |n| {
        Ok(loss.evaluate(&n.forward(input)?, target)?.value)
    })
}
