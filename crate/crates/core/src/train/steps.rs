//! Loss values and parameter gradients for each update type.
//!
//! These functions only read the model. The trainer applies the returned
//! gradients to the one network each update is allowed to touch.

use crate::error::{Error, Result};
use crate::model::{concat_pair, BiGanModel};
use crate::tensor::{bce_loss, Matrix, NetworkGrads};

/// Target for `[x, E(x)]` pairs when training the discriminator.
pub const REAL_PAIR_TARGET: f64 = 0.0;
/// Target for `[G(z), z]` pairs when training the discriminator.
pub const FAKE_PAIR_TARGET: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct StepGrads {
    pub loss: f64,
    pub grads: NetworkGrads,
}

fn targets(rows: usize, value: f64) -> Matrix {
    Matrix::filled(rows, 1, value)
}

/// `BCE(D[x,E(x)], 0) + BCE(D[G(z),z], 1)` and its gradient w.r.t. `D`.
pub fn discriminator_gradients(model: &BiGanModel, x: &Matrix, z: &Matrix) -> Result<StepGrads> {
    let d = &model.discriminator;

    let (p_real, trace) = d.forward_traced(&model.real_pair(x)?)?;
    let real = bce_loss(&p_real, &targets(x.rows(), REAL_PAIR_TARGET))?;
    let mut grads = d.backward_traced(&trace, &real.grad)?.grads;

    let (p_fake, trace) = d.forward_traced(&model.fake_pair(z)?)?;
    let fake = bce_loss(&p_fake, &targets(z.rows(), FAKE_PAIR_TARGET))?;
    grads.accumulate(&d.backward_traced(&trace, &fake.grad)?.grads)?;

    Ok(StepGrads {
        loss: real.value + fake.value,
        grads,
    })
}

/// `BCE(D[G(z),z], 0)` and its gradient w.r.t. `G`, through a frozen `D`.
pub fn generator_gradients(model: &BiGanModel, z: &Matrix) -> Result<StepGrads> {
    if z.cols() != model.latent_dim() {
        return Err(Error::shape("generator_gradients", z.shape(), (z.rows(), model.latent_dim())));
    }
    let (g, g_trace) = model.generator.forward_traced(z)?;
    let latent = if model.encoder_enabled {
        z.clone()
    } else {
        Matrix::zeros(z.rows(), model.latent_dim())
    };
    let (p, d_trace) = model.discriminator.forward_traced(&concat_pair(&g, &latent)?)?;
    let loss = bce_loss(&p, &targets(z.rows(), REAL_PAIR_TARGET))?;
    let d_input = model.discriminator.backward_traced(&d_trace, &loss.grad)?.input_grad;
    let (dg, _) = d_input.split_cols(model.feature_width())?;
    Ok(StepGrads {
        loss: loss.value,
        grads: model.generator.backward_traced(&g_trace, &dg)?.grads,
    })
}

/// `BCE(D[x,E(x)], 1)` and its gradient w.r.t. `E`, through a frozen `D`.
pub fn encoder_gradients(model: &BiGanModel, x: &Matrix) -> Result<StepGrads> {
    if !model.encoder_enabled {
        return Err(Error::State("the encoder is disabled for this model".into()));
    }
    if x.cols() != model.feature_width() {
        return Err(Error::shape("encoder_gradients", x.shape(), (x.rows(), model.feature_width())));
    }
    let (e, e_trace) = model.encoder.forward_traced(x)?;
    let (p, d_trace) = model.discriminator.forward_traced(&concat_pair(x, &e)?)?;
    let loss = bce_loss(&p, &targets(x.rows(), FAKE_PAIR_TARGET))?;
    let d_input = model.discriminator.backward_traced(&d_trace, &loss.grad)?.input_grad;
    let (_, de) = d_input.split_cols(model.feature_width())?;
    Ok(StepGrads {
        loss: loss.value,
        grads: model.encoder.backward_traced(&e_trace, &de)?.grads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_noise, ModelShape};
    use crate::tensor::{finite_difference_check, Activation, DenseLayer, Network, FD_STEP};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const LN2: f64 = std::f64::consts::LN_2;

    fn small_model(seed: u64) -> BiGanModel {
        let shape = ModelShape {
            feature_width: 7,
            latent_dim: 3,
            hidden_widths: vec![6, 5],
            discriminator_hidden: 6,
        };
        let mut m = BiGanModel::init(shape, seed).unwrap();
        // Non-zero biases so the checks cover bias gradients too.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xB1A5);
        for net in [&mut m.encoder, &mut m.generator, &mut m.discriminator] {
            for layer in net.layers_mut() {
                for b in &mut layer.bias {
                    *b = rng.random_range(0.02..0.1);
                }
            }
        }
        m
    }

    fn data(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..rows * cols).map(|_| rng.random_range(0.0..1.0)).collect();
        Matrix::new(rows, cols, v).unwrap()
    }

    fn neutral_discriminator(m: &mut BiGanModel) {
        let out = &mut m.discriminator.layers_mut()[1];
        *out = DenseLayer::zeros(out.fan_in(), 1, Activation::Sigmoid);
    }

    /// Independent forward-only loss for the finite-difference oracle.
    fn bce_mean(p: &Matrix, t: f64) -> f64 {
        p.data()
            .iter()
            .map(|&p| -(t * p.ln() + (1.0 - t) * (1.0 - p).ln()))
            .sum::<f64>()
            / p.rows() as f64
    }

    fn pair_loss(d: &Network, data: &Matrix, latent: &Matrix, t: f64) -> Result<f64> {
        Ok(bce_mean(&d.forward(&data.hstack(latent)?)?, t))
    }

    #[test]
    fn symmetric_point_losses() {
        let mut m = BiGanModel::init(ModelShape::default(), 3).unwrap();
        neutral_discriminator(&mut m);
        let x = data(16, 122, 1);
        let z = sample_noise(16, 10, &mut ChaCha8Rng::seed_from_u64(2));
        let d = discriminator_gradients(&m, &x, &z).unwrap();
        assert!((d.loss - 2.0 * LN2).abs() < 1e-12, "{}", d.loss);
        assert!((generator_gradients(&m, &z).unwrap().loss - LN2).abs() < 1e-12);
        assert!((encoder_gradients(&m, &x).unwrap().loss - LN2).abs() < 1e-12);
    }

    #[test]
    fn generator_chain_matches_finite_differences() {
        let m = small_model(5);
        let z = sample_noise(6, 3, &mut ChaCha8Rng::seed_from_u64(8));
        let analytic = generator_gradients(&m, &z).unwrap().grads;
        let mut g = m.generator.clone();
        let report = finite_difference_check(&mut g, &analytic, FD_STEP, |g| {
            pair_loss(&m.discriminator, &g.forward(&z)?, &z, REAL_PAIR_TARGET)
        })
        .unwrap();
        assert!(report.passes(1e-4), "{report:?}");
    }

    #[test]
    fn encoder_chain_matches_finite_differences() {
        let m = small_model(6);
        let x = data(6, 7, 9);
        let analytic = encoder_gradients(&m, &x).unwrap().grads;
        let mut e = m.encoder.clone();
        let report = finite_difference_check(&mut e, &analytic, FD_STEP, |e| {
            pair_loss(&m.discriminator, &x, &e.forward(&x)?, FAKE_PAIR_TARGET)
        })
        .unwrap();
        assert!(report.passes(1e-4), "{report:?}");
    }

    #[test]
    fn discriminator_matches_finite_differences() {
        let m = small_model(7);
        let x = data(5, 7, 10);
        let z = sample_noise(5, 3, &mut ChaCha8Rng::seed_from_u64(11));
        let analytic = discriminator_gradients(&m, &x, &z).unwrap().grads;
        let real_latent = m.encoder.forward(&x).unwrap();
        let fake = m.generator.forward(&z).unwrap();
        let mut d = m.discriminator.clone();
        let report = finite_difference_check(&mut d, &analytic, FD_STEP, |d| {
            Ok(pair_loss(d, &x, &real_latent, REAL_PAIR_TARGET)?
                + pair_loss(d, &fake, &z, FAKE_PAIR_TARGET)?)
        })
        .unwrap();
        assert!(report.passes(1e-4), "{report:?}");
    }

    #[test]
    fn disabled_encoder_uses_zero_latent() {
        let mut m = small_model(8);
        m.encoder_enabled = false;
        let z = sample_noise(4, 3, &mut ChaCha8Rng::seed_from_u64(1));
        let analytic = generator_gradients(&m, &z).unwrap().grads;
        let zeros = Matrix::zeros(4, 3);
        let mut g = m.generator.clone();
        let report = finite_difference_check(&mut g, &analytic, FD_STEP, |g| {
            pair_loss(&m.discriminator, &g.forward(&z)?, &zeros, REAL_PAIR_TARGET)
        })
        .unwrap();
        assert!(report.passes(1e-4), "{report:?}");
        assert!(matches!(encoder_gradients(&m, &data(2, 7, 0)), Err(Error::State(_))));
    }

    #[test]
    fn shape_errors_propagate() {
        let m = small_model(1);
        assert!(generator_gradients(&m, &Matrix::zeros(2, 4)).is_err());
        assert!(encoder_gradients(&m, &Matrix::zeros(2, 6)).is_err());
        assert!(discriminator_gradients(&m, &Matrix::zeros(2, 7), &Matrix::zeros(2, 2)).is_err());
    }
}
