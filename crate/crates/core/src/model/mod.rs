//! Encoder, generator and discriminator of the bidirectional GAN.
//!
//! * encoder: features → latent, ReLU on every layer (including the output)
//! * generator: latent → features, ReLU hidden, sigmoid output in (0, 1)
//! * discriminator: `[features | latent]` → one sigmoid probability
//!
//! The discriminator scores pairs. Real pairs are `[x, E(x)]`, fake pairs
//! `[G(z), z]`. A model whose encoder is disabled (the plain GAN baseline)
//! pairs every sample with a zero latent block instead.

mod checkpoint;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use checkpoint::{sha256_hex, CHECKPOINT_VERSION};

use crate::error::{Error, Result};
use crate::tensor::{Activation, Matrix, Network};

/// Layer widths of the three networks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelShape {
    pub feature_width: usize,
    pub latent_dim: usize,
    /// Encoder hidden widths, input side first. The generator mirrors them.
    pub hidden_widths: Vec<usize>,
    pub discriminator_hidden: usize,
}

impl Default for ModelShape {
    fn default() -> Self {
        Self {
            feature_width: 122,
            latent_dim: 10,
            hidden_widths: vec![64, 32],
            discriminator_hidden: 64,
        }
    }
}

impl ModelShape {
    pub fn new(feature_width: usize, latent_dim: usize) -> Self {
        Self {
            feature_width,
            latent_dim,
            ..Self::default()
        }
    }

    pub fn pair_width(&self) -> usize {
        self.feature_width + self.latent_dim
    }

    pub fn encoder_widths(&self) -> Vec<usize> {
        let mut w = vec![self.feature_width];
        w.extend(&self.hidden_widths);
        w.push(self.latent_dim);
        w
    }

    pub fn generator_widths(&self) -> Vec<usize> {
        let mut w = self.encoder_widths();
        w.reverse();
        w
    }

    pub fn discriminator_widths(&self) -> Vec<usize> {
        vec![self.pair_width(), self.discriminator_hidden, 1]
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_width == 0 || self.latent_dim == 0 {
            return Err(Error::Config(format!(
                "feature width and latent dim must be positive, got {} and {}",
                self.feature_width, self.latent_dim
            )));
        }
        if self.discriminator_hidden == 0 || self.hidden_widths.contains(&0) {
            return Err(Error::Config("hidden widths must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiGanModel {
    pub encoder: Network,
    pub generator: Network,
    pub discriminator: Network,
    pub shape: ModelShape,
    pub seed: u64,
    /// When false, real pairs use a zero latent block instead of `E(x)` and
    /// fake pairs use a zero block instead of `z`.
    pub encoder_enabled: bool,
}

impl BiGanModel {
    /// Glorot-uniform weights and zero biases from a ChaCha stream seeded
    /// with `seed`; encoder, generator, discriminator drawn in that order.
    pub fn init(shape: ModelShape, seed: u64) -> Result<Self> {
        shape.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let encoder = Network::xavier(
            &shape.encoder_widths(),
            Activation::Relu,
            Activation::Relu,
            &mut rng,
        )?;
        let generator = Network::xavier(
            &shape.generator_widths(),
            Activation::Relu,
            Activation::Sigmoid,
            &mut rng,
        )?;
        let discriminator = Network::xavier(
            &shape.discriminator_widths(),
            Activation::Relu,
            Activation::Sigmoid,
            &mut rng,
        )?;
        Ok(Self {
            encoder,
            generator,
            discriminator,
            shape,
            seed,
            encoder_enabled: true,
        })
    }

    pub fn latent_dim(&self) -> usize {
        self.shape.latent_dim
    }

    pub fn feature_width(&self) -> usize {
        self.shape.feature_width
    }

    fn check_width(&self, m: &Matrix, expected: usize, op: &'static str) -> Result<()> {
        if m.cols() != expected {
            return Err(Error::shape(op, m.shape(), (m.rows(), expected)));
        }
        Ok(())
    }

    /// `E(x)`: `n × feature_width` → `n × latent_dim`, entries ≥ 0.
    pub fn encode(&self, x: &Matrix) -> Result<Matrix> {
        self.check_width(x, self.feature_width(), "encode")?;
        self.encoder.forward(x)
    }

    /// `G(z)`: `n × latent_dim` → `n × feature_width`, entries in (0, 1).
    pub fn generate(&self, z: &Matrix) -> Result<Matrix> {
        self.check_width(z, self.latent_dim(), "generate")?;
        self.generator.forward(z)
    }

    /// `D(pair)`: `n × (feature_width + latent_dim)` → `n × 1`.
    pub fn discriminate(&self, pair: &Matrix) -> Result<Matrix> {
        self.check_width(pair, self.shape.pair_width(), "discriminate")?;
        self.discriminator.forward(pair)
    }

    /// Latent block paired with data samples: `E(x)`, or zeros when the
    /// encoder is disabled.
    pub fn latent_for(&self, x: &Matrix) -> Result<Matrix> {
        if self.encoder_enabled {
            self.encode(x)
        } else {
            self.check_width(x, self.feature_width(), "latent_for")?;
            Ok(Matrix::zeros(x.rows(), self.latent_dim()))
        }
    }

    /// `[x, E(x)]` (or `[x, 0]` with the encoder disabled).
    pub fn real_pair(&self, x: &Matrix) -> Result<Matrix> {
        concat_pair(x, &self.latent_for(x)?)
    }

    /// `[G(z), z]` (or `[G(z), 0]` with the encoder disabled).
    pub fn fake_pair(&self, z: &Matrix) -> Result<Matrix> {
        let g = self.generate(z)?;
        if self.encoder_enabled {
            concat_pair(&g, z)
        } else {
            concat_pair(&g, &Matrix::zeros(z.rows(), self.latent_dim()))
        }
    }

    /// Total trainable parameters across the three networks.
    pub fn param_count(&self) -> usize {
        self.encoder.param_count() + self.generator.param_count() + self.discriminator.param_count()
    }
}

/// Column-wise `[data | latent]`, data columns first.
pub fn concat_pair(data: &Matrix, latent: &Matrix) -> Result<Matrix> {
    if data.rows() != latent.rows() {
        return Err(Error::shape("concat_pair", data.shape(), latent.shape()));
    }
    data.hstack(latent)
}

/// `n × latent_dim` i.i.d. standard normal draws.
pub fn sample_noise<R: Rng + ?Sized>(n: usize, latent_dim: usize, rng: &mut R) -> Matrix {
    let data = (0..n * latent_dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    Matrix::new(n, latent_dim, data).expect("normal draws are finite")
}
