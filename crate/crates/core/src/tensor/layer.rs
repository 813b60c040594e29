//! Dense layers and layer stacks with reverse-mode gradients.
//!
//! A [`DenseLayer`] computes `activation(x·W + b)` for a batch `x` (one sample
//! per row). A [`Network`] is an ordered stack of layers. Calling
//! [`Network::forward_cached`] records the per-layer inputs and outputs so a
//! following [`Network::backward`] can produce parameter gradients and the
//! gradient with respect to the network input; the latter lets callers chain
//! gradients through joined networks (discriminator into generator/encoder).

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => sigmoid(z),
            Activation::Identity => z,
        }
    }

    /// Derivative given the pre-activation `z` and the output `y`.
    /// ReLU'(0) is taken as 0.
    #[inline]
    pub fn derivative(self, z: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Sigmoid => 1,
            Activation::Identity => 2,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Sigmoid),
            2 => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// Largest `f64` strictly below 1.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Logistic function. The result is kept strictly inside (0, 1) even where
/// the exact value rounds to 0 or 1.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    let y = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    y.clamp(f64::MIN_POSITIVE, BELOW_ONE)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `fan_in × fan_out`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

/// Values recorded by a forward pass and consumed by the backward pass.
#[derive(Debug, Clone)]
pub struct LayerCache {
    input: Matrix,
    pre_activation: Matrix,
    output: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(fan_in: usize, fan_out: usize, activation: Activation) -> Self {
        Self {
            weights: Matrix::zeros(fan_in, fan_out),
            bias: vec![0.0; fan_out],
            activation,
        }
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero bias.
    pub fn xavier<R: Rng + ?Sized>(
        fan_in: usize,
        fan_out: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if fan_in == 0 || fan_out == 0 {
            return Err(Error::Config(format!(
                "layer dimensions must be positive, got {fan_in}x{fan_out}"
            )));
        }
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite non-empty range");
        let data = (0..fan_in * fan_out).map(|_| dist.sample(rng)).collect();
        Ok(Self {
            weights: Matrix::new(fan_in, fan_out, data)?,
            bias: vec![0.0; fan_out],
            activation,
        })
    }

    #[inline]
    pub fn fan_in(&self) -> usize {
        self.weights.rows()
    }

    #[inline]
    pub fn fan_out(&self) -> usize {
        self.weights.cols()
    }

    pub fn param_count(&self) -> usize {
        self.weights.data().len() + self.bias.len()
    }

    fn pre_activation(&self, input: &Matrix) -> Result<Matrix> {
        if input.cols() != self.fan_in() {
            return Err(Error::shape("dense_forward", input.shape(), self.weights.shape()));
        }
        let mut z = input.matmul(&self.weights)?;
        z.add_row_vector(&self.bias)?;
        Ok(z)
    }

    pub fn forward(&self, input: &Matrix) -> Result<Matrix> {
        let act = self.activation;
        Ok(self.pre_activation(input)?.map(|z| act.apply(z)))
    }

    pub fn forward_with_cache(&self, input: &Matrix) -> Result<(Matrix, LayerCache)> {
        let z = self.pre_activation(input)?;
        let act = self.activation;
        let y = z.map(|v| act.apply(v));
        let cache = LayerCache {
            input: input.clone(),
            pre_activation: z,
            output: y.clone(),
        };
        Ok((y, cache))
    }

    /// Returns `(dL/dW, dL/db)` and `dL/dinput` for upstream `dL/doutput`.
    pub fn backward(&self, cache: &LayerCache, upstream: &Matrix) -> Result<(LayerGrads, Matrix)> {
        if upstream.shape() != cache.output.shape() {
            return Err(Error::shape("dense_backward", upstream.shape(), cache.output.shape()));
        }
        let act = self.activation;
        let mut delta = upstream.clone();
        for ((d, &z), &y) in delta
            .data_mut()
            .iter_mut()
            .zip(cache.pre_activation.data())
            .zip(cache.output.data())
        {
            *d *= act.derivative(z, y);
        }
        let weights = cache.input.t_matmul(&delta)?;
        let bias = delta.column_sums();
        let input_grad = delta.matmul_t(&self.weights)?;
        Ok((LayerGrads { weights, bias }, input_grad))
    }
}

/// Ordered stack of dense layers.
#[derive(Debug, Default)]
pub struct Network {
    layers: Vec<DenseLayer>,
    cache: Option<Vec<LayerCache>>,
}

impl Clone for Network {
    fn clone(&self) -> Self {
        Self {
            layers: self.layers.clone(),
            cache: None,
        }
    }
}

/// Parameters only; a pending forward cache does not affect equality.
impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGrads {
    pub layers: Vec<LayerGrads>,
}

/// Layer inputs and outputs recorded by [`Network::forward_traced`].
#[derive(Debug, Clone)]
pub struct ForwardTrace(Vec<LayerCache>);

#[derive(Debug, Clone)]
pub struct Backprop {
    pub grads: NetworkGrads,
    pub input_grad: Matrix,
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        for pair in layers.windows(2) {
            if pair[0].fan_out() != pair[1].fan_in() {
                return Err(Error::shape(
                    "Network::new",
                    pair[0].weights.shape(),
                    pair[1].weights.shape(),
                ));
            }
        }
        for layer in &layers {
            if layer.bias.len() != layer.fan_out() {
                return Err(Error::shape(
                    "Network::new",
                    layer.weights.shape(),
                    (1, layer.bias.len()),
                ));
            }
        }
        Ok(Self {
            layers,
            cache: None,
        })
    }

    /// Glorot-initialised stack through `widths` (input width first), with
    /// `hidden` on every layer but the last.
    pub fn xavier<R: Rng + ?Sized>(
        widths: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::Config("a network needs at least two widths".into()));
        }
        let last = widths.len() - 2;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i == last { output } else { hidden };
                DenseLayer::xavier(w[0], w[1], act, rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    /// Mutable access to parameters. Drops any pending forward cache.
    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        self.cache = None;
        &mut self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers.first().map_or(0, DenseLayer::fan_in)
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(0, DenseLayer::fan_out)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    pub fn forward(&self, input: &Matrix) -> Result<Matrix> {
        let mut x = input.clone();
        for layer in &self.layers {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    /// Forward pass returning the per-layer record needed by
    /// [`Network::backward_traced`]; leaves `self` untouched.
    pub fn forward_traced(&self, input: &Matrix) -> Result<(Matrix, ForwardTrace)> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        for layer in &self.layers {
            let (y, cache) = layer.forward_with_cache(&x)?;
            caches.push(cache);
            x = y;
        }
        Ok((x, ForwardTrace(caches)))
    }

    /// Forward pass that keeps what [`Network::backward`] needs.
    pub fn forward_cached(&mut self, input: &Matrix) -> Result<Matrix> {
        let (y, trace) = self.forward_traced(input)?;
        self.cache = Some(trace.0);
        Ok(y)
    }

    pub fn has_cache(&self) -> bool {
        self.cache.is_some()
    }

    pub fn clear_cache(&mut self) {
        self.cache = None;
    }

    /// Gradients of a scalar loss given `dL/doutput` for the cached batch.
    pub fn backward(&self, upstream: &Matrix) -> Result<Backprop> {
        let caches = self
            .cache
            .as_ref()
            .ok_or_else(|| Error::State("backward called without a cached forward pass".into()))?;
        self.backward_layers(caches, upstream)
    }

    /// Like [`Network::backward`], for a trace from [`Network::forward_traced`].
    pub fn backward_traced(&self, trace: &ForwardTrace, upstream: &Matrix) -> Result<Backprop> {
        if trace.0.len() != self.layers.len() {
            return Err(Error::State("trace does not belong to this network".into()));
        }
        self.backward_layers(&trace.0, upstream)
    }

    fn backward_layers(&self, caches: &[LayerCache], upstream: &Matrix) -> Result<Backprop> {
        let mut grad = upstream.clone();
        let mut layer_grads = Vec::with_capacity(self.layers.len());
        for (layer, cache) in self.layers.iter().zip(caches).rev() {
            let (g, input_grad) = layer.backward(cache, &grad)?;
            layer_grads.push(g);
            grad = input_grad;
        }
        layer_grads.reverse();
        Ok(Backprop {
            grads: NetworkGrads {
                layers: layer_grads,
            },
            input_grad: grad,
        })
    }

    /// Every parameter buffer in declaration order: W₀, b₀, W₁, b₁, …
    pub fn param_slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.data(), l.bias.as_slice()])
            .collect()
    }

    /// Mutable parameter buffers, same order as [`Network::param_slices`].
    /// Drops any pending forward cache.
    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.cache = None;
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.data_mut(), l.bias.as_mut_slice()])
            .collect()
    }
}

impl NetworkGrads {
    pub fn slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|g| [g.weights.data(), g.bias.as_slice()])
            .collect()
    }

    /// Element-wise `self += other`.
    pub fn accumulate(&mut self, other: &NetworkGrads) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::shape(
                "NetworkGrads::accumulate",
                (self.layers.len(), 0),
                (other.layers.len(), 0),
            ));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            if a.weights.shape() != b.weights.shape() {
                return Err(Error::shape(
                    "NetworkGrads::accumulate",
                    a.weights.shape(),
                    b.weights.shape(),
                ));
            }
            for (x, y) in a.weights.data_mut().iter_mut().zip(b.weights.data()) {
                *x += y;
            }
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += y;
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|&v| v == 0.0))
    }
}
