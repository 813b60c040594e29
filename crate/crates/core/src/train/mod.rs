//! Training schedules.
//!
//! Each outer iteration depends on [`TrainingMode`]:
//!
//! * `DecoupledBiGan`: one discriminator step, then `k` rounds of one
//!   generator step followed by one encoder step.
//! * `StandardBiGan`: `k` discriminator steps, then one joint
//!   generator + encoder step.
//! * `GenericGan`: `k` discriminator steps, then one generator step. The
//!   encoder is disabled and never trained.
//!
//! Every step draws a fresh minibatch and fresh noise. The generator and
//! encoder are trained against flipped targets (non-saturating loss).

mod sampler;
mod steps;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use sampler::{sample_batch_indices, MinibatchSampler};
pub use steps::{
    discriminator_gradients, encoder_gradients, generator_gradients, StepGrads,
    FAKE_PAIR_TARGET, REAL_PAIR_TARGET,
};

use crate::error::{Error, Result};
use crate::model::{sample_noise, BiGanModel};
use crate::tensor::{AdamConfig, AdamState, Matrix, Network, NetworkGrads};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrainingMode {
    #[serde(rename = "generic-gan")]
    GenericGan,
    #[serde(rename = "standard-bigan")]
    StandardBiGan,
    #[serde(rename = "decoupled-bigan")]
    DecoupledBiGan,
}

impl TrainingMode {
    pub const ALL: [TrainingMode; 3] = [
        TrainingMode::GenericGan,
        TrainingMode::StandardBiGan,
        TrainingMode::DecoupledBiGan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TrainingMode::GenericGan => "generic-gan",
            TrainingMode::StandardBiGan => "standard-bigan",
            TrainingMode::DecoupledBiGan => "decoupled-bigan",
        }
    }

    pub fn uses_encoder(self) -> bool {
        self != TrainingMode::GenericGan
    }
}

impl fmt::Display for TrainingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrainingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown mode {s:?} (expected generic-gan, standard-bigan or decoupled-bigan)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub iterations: usize,
    pub k_steps: usize,
    pub mode: TrainingMode,
    pub seed: u64,
    /// Leave the decoupled inner loop once both the generator and encoder
    /// losses fall below this value.
    pub early_exit: Option<f64>,
    #[serde(default)]
    pub adam: AdamConfig,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            learning_rate: 0.002,
            iterations: 1000,
            k_steps: 5,
            mode: TrainingMode::DecoupledBiGan,
            seed: 0,
            early_exit: None,
            adam: AdamConfig::default(),
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("batch_size", self.batch_size),
            ("iterations", self.iterations),
            ("k_steps", self.k_steps),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if let Some(t) = self.early_exit {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!("early_exit must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

/// Number of parameter updates applied to each network.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCounts {
    pub discriminator: u64,
    pub generator: u64,
    pub encoder: u64,
}

/// Per-iteration losses. The generator and encoder entries are means over
/// the steps taken in that iteration; the encoder entry is 0 when the
/// encoder is disabled.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTrace {
    pub discriminator: Vec<f64>,
    pub generator: Vec<f64>,
    pub encoder: Vec<f64>,
}

impl LossTrace {
    pub fn len(&self) -> usize {
        self.discriminator.len()
    }

    pub fn is_empty(&self) -> bool {
        self.discriminator.is_empty()
    }

    fn push(&mut self, d: f64, g: f64, e: f64) {
        self.discriminator.push(d);
        self.generator.push(g);
        self.encoder.push(e);
    }

    /// `iteration,dloss,gloss,eloss` with a header line; iterations count from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,dloss,gloss,eloss\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                self.discriminator[i],
                self.generator[i],
                self.encoder[i]
            ));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Optimizers {
    encoder: AdamState,
    generator: AdamState,
    discriminator: AdamState,
}

fn adam_for(net: &Network, config: AdamConfig) -> AdamState {
    AdamState::for_buffers(config, &net.param_slices())
}

fn apply(net: &mut Network, adam: &mut AdamState, grads: &NetworkGrads, lr: f64) -> Result<()> {
    let g = grads.slices();
    let mut p = net.param_slices_mut();
    adam.step(&mut p, &g, lr)
}

#[derive(Debug, Clone)]
pub struct TrainingState {
    pub iterations_completed: usize,
    pub trace: LossTrace,
    pub counts: StepCounts,
    rng: ChaCha8Rng,
    optimizers: Optimizers,
}

impl TrainingState {
    pub fn adam_steps(&self) -> StepCounts {
        StepCounts {
            discriminator: self.optimizers.discriminator.step_count(),
            generator: self.optimizers.generator.step_count(),
            encoder: self.optimizers.encoder.step_count(),
        }
    }
}

/// Owns a model during training, along with the optimiser and RNG state.
#[derive(Debug)]
pub struct Trainer<'a> {
    model: BiGanModel,
    data: &'a Matrix,
    config: TrainingConfig,
    state: TrainingState,
}

/// Training randomness uses its own ChaCha stream so it never overlaps the
/// initialisation draws made from the same seed.
const TRAINING_STREAM: u64 = 1;

impl<'a> Trainer<'a> {
    /// `data` holds the training rows (normal traffic only), one per row.
    pub fn new(mut model: BiGanModel, data: &'a Matrix, config: TrainingConfig) -> Result<Self> {
        config.validate()?;
        if data.rows() == 0 {
            return Err(Error::Empty("training dataset"));
        }
        if data.cols() != model.feature_width() {
            return Err(Error::shape(
                "Trainer::new",
                data.shape(),
                (data.rows(), model.feature_width()),
            ));
        }
        sampler::check_batch(data.rows(), config.batch_size)?;
        model.encoder_enabled = config.mode.uses_encoder();

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(TRAINING_STREAM);
        let optimizers = Optimizers {
            encoder: adam_for(&model.encoder, config.adam),
            generator: adam_for(&model.generator, config.adam),
            discriminator: adam_for(&model.discriminator, config.adam),
        };
        Ok(Self {
            model,
            data,
            state: TrainingState {
                iterations_completed: 0,
                trace: LossTrace::default(),
                counts: StepCounts::default(),
                rng,
                optimizers,
            },
            config,
        })
    }

    pub fn model(&self) -> &BiGanModel {
        &self.model
    }

    pub fn state(&self) -> &TrainingState {
        &self.state
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.config
    }

    pub fn next_batch(&mut self) -> Result<Matrix> {
        let idx = sample_batch_indices(self.data.rows(), self.config.batch_size, &mut self.state.rng)?;
        self.data.select_rows(&idx)
    }

    pub fn next_noise(&mut self) -> Matrix {
        sample_noise(self.config.batch_size, self.model.latent_dim(), &mut self.state.rng)
    }

    /// One update of the discriminator on `x` and freshly drawn noise.
    pub fn discriminator_step(&mut self, x: &Matrix) -> Result<f64> {
        let z = self.next_noise();
        let step = discriminator_gradients(&self.model, x, &z)?;
        apply(
            &mut self.model.discriminator,
            &mut self.state.optimizers.discriminator,
            &step.grads,
            self.config.learning_rate,
        )?;
        self.state.counts.discriminator += 1;
        Ok(step.loss)
    }

    /// One update of the generator on freshly drawn noise.
    pub fn generator_step(&mut self) -> Result<f64> {
        let z = self.next_noise();
        let step = generator_gradients(&self.model, &z)?;
        apply(
            &mut self.model.generator,
            &mut self.state.optimizers.generator,
            &step.grads,
            self.config.learning_rate,
        )?;
        self.state.counts.generator += 1;
        Ok(step.loss)
    }

    /// One update of the encoder on `x`.
    pub fn encoder_step(&mut self, x: &Matrix) -> Result<f64> {
        let step = encoder_gradients(&self.model, x)?;
        apply(
            &mut self.model.encoder,
            &mut self.state.optimizers.encoder,
            &step.grads,
            self.config.learning_rate,
        )?;
        self.state.counts.encoder += 1;
        Ok(step.loss)
    }

    /// Generator and encoder gradients taken at the same parameters, then
    /// both applied.
    pub fn joint_step(&mut self, x: &Matrix) -> Result<(f64, f64)> {
        let z = self.next_noise();
        let g = generator_gradients(&self.model, &z)?;
        let e = encoder_gradients(&self.model, x)?;
        let lr = self.config.learning_rate;
        apply(&mut self.model.generator, &mut self.state.optimizers.generator, &g.grads, lr)?;
        apply(&mut self.model.encoder, &mut self.state.optimizers.encoder, &e.grads, lr)?;
        self.state.counts.generator += 1;
        self.state.counts.encoder += 1;
        Ok((g.loss, e.loss))
    }

    fn discriminator_round(&mut self, steps: usize) -> Result<f64> {
        let mut total = 0.0;
        for _ in 0..steps {
            let x = self.next_batch()?;
            total += self.discriminator_step(&x)?;
        }
        Ok(total / steps as f64)
    }

    fn iteration_losses(&mut self) -> Result<(f64, f64, f64)> {
        let k = self.config.k_steps;
        match self.config.mode {
            TrainingMode::DecoupledBiGan => {
                let d = self.discriminator_round(1)?;
                let (mut g_sum, mut e_sum, mut taken) = (0.0, 0.0, 0);
                for _ in 0..k {
                    let g = self.generator_step()?;
                    let x = self.next_batch()?;
                    let e = self.encoder_step(&x)?;
                    g_sum += g;
                    e_sum += e;
                    taken += 1;
                    if self.config.early_exit.is_some_and(|t| g < t && e < t) {
                        break;
                    }
                }
                Ok((d, g_sum / taken as f64, e_sum / taken as f64))
            }
            TrainingMode::StandardBiGan => {
                let d = self.discriminator_round(k)?;
                let x = self.next_batch()?;
                let (g, e) = self.joint_step(&x)?;
                Ok((d, g, e))
            }
            TrainingMode::GenericGan => {
                let d = self.discriminator_round(k)?;
                let g = self.generator_step()?;
                Ok((d, g, 0.0))
            }
        }
    }

    /// Runs one outer iteration and records its losses.
    pub fn step_iteration(&mut self) -> Result<()> {
        let iteration = self.state.iterations_completed + 1;
        let (d, g, e) = self.iteration_losses().map_err(|err| match err {
            Error::Domain { .. } => Error::NonFiniteLoss {
                iteration,
                which: "training",
                value: f64::NAN,
            },
            other => other,
        })?;
        for (which, value) in [("discriminator", d), ("generator", g), ("encoder", e)] {
            if !value.is_finite() {
                return Err(Error::NonFiniteLoss {
                    iteration,
                    which,
                    value,
                });
            }
        }
        self.state.trace.push(d, g, e);
        self.state.iterations_completed = iteration;
        Ok(())
    }

    pub fn run(mut self) -> Result<TrainOutcome> {
        while self.state.iterations_completed < self.config.iterations {
            self.step_iteration()?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> TrainOutcome {
        TrainOutcome {
            model: self.model,
            state: self.state,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: BiGanModel,
    pub state: TrainingState,
}

/// Trains `model` on the rows of `data` for `config.iterations` iterations.
pub fn train(model: BiGanModel, data: &Matrix, config: &TrainingConfig) -> Result<TrainOutcome> {
    Trainer::new(model, data, config.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelShape;
    use crate::tensor::{Activation, DenseLayer};
    use proptest::prelude::*;
    use rand::Rng;

    const LN2: f64 = std::f64::consts::LN_2;

    fn shape() -> ModelShape {
        ModelShape {
            feature_width: 12,
            latent_dim: 4,
            hidden_widths: vec![10, 8],
            discriminator_hidden: 10,
        }
    }

    fn data(rows: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..rows * 12).map(|_| rng.random_range(0.0..1.0)).collect();
        Matrix::new(rows, 12, v).unwrap()
    }

    fn config(mode: TrainingMode, iterations: usize, k: usize) -> TrainingConfig {
        TrainingConfig {
            batch_size: 16,
            iterations,
            k_steps: k,
            mode,
            seed: 9,
            ..TrainingConfig::default()
        }
    }

    fn model() -> BiGanModel {
        BiGanModel::init(shape(), 1).unwrap()
    }

    #[test]
    fn defaults_and_validation() {
        let c = TrainingConfig::default();
        assert_eq!((c.batch_size, c.iterations, c.k_steps), (64, 1000, 5));
        assert_eq!(c.learning_rate, 0.002);
        assert_eq!(c.mode, TrainingMode::DecoupledBiGan);
        assert!(c.validate().is_ok());
        for bad in [
            TrainingConfig { batch_size: 0, ..c.clone() },
            TrainingConfig { k_steps: 0, ..c.clone() },
            TrainingConfig { iterations: 0, ..c.clone() },
            TrainingConfig { learning_rate: f64::NAN, ..c.clone() },
            TrainingConfig { early_exit: Some(0.0), ..c.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn mode_names_round_trip() {
        for m in TrainingMode::ALL {
            assert_eq!(m.as_str().parse::<TrainingMode>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
        assert!("bigan".parse::<TrainingMode>().is_err());
    }

    #[test]
    fn rejects_bad_datasets() {
        let c = config(TrainingMode::DecoupledBiGan, 1, 1);
        assert!(matches!(
            Trainer::new(model(), &Matrix::zeros(0, 12), c.clone()),
            Err(Error::Empty(_))
        ));
        assert!(Trainer::new(model(), &data(8, 0), c.clone()).is_err());
        assert!(Trainer::new(model(), &Matrix::zeros(30, 11), c).is_err());
    }

    #[test]
    fn discriminator_step_freezes_encoder_and_generator() {
        let x = data(40, 1);
        let mut t = Trainer::new(model(), &x, config(TrainingMode::DecoupledBiGan, 1, 1)).unwrap();
        let before = t.model().clone();
        let batch = t.next_batch().unwrap();
        t.discriminator_step(&batch).unwrap();
        assert_eq!(t.model().encoder, before.encoder);
        assert_eq!(t.model().generator, before.generator);
        assert_ne!(t.model().discriminator, before.discriminator);
    }

    #[test]
    fn generator_step_freezes_discriminator_and_encoder() {
        let x = data(40, 1);
        let mut t = Trainer::new(model(), &x, config(TrainingMode::DecoupledBiGan, 1, 1)).unwrap();
        let before = t.model().clone();
        t.generator_step().unwrap();
        assert_eq!(t.model().discriminator, before.discriminator);
        assert_eq!(t.model().encoder, before.encoder);
        assert_ne!(t.model().generator, before.generator);
    }

    #[test]
    fn encoder_step_freezes_discriminator_and_generator() {
        let x = data(40, 1);
        let mut t = Trainer::new(model(), &x, config(TrainingMode::DecoupledBiGan, 1, 1)).unwrap();
        let before = t.model().clone();
        let batch = t.next_batch().unwrap();
        t.encoder_step(&batch).unwrap();
        assert_eq!(t.model().discriminator, before.discriminator);
        assert_eq!(t.model().generator, before.generator);
        assert_ne!(t.model().encoder, before.encoder);
    }

    #[test]
    fn joint_step_freezes_discriminator() {
        let x = data(40, 1);
        let mut t = Trainer::new(model(), &x, config(TrainingMode::StandardBiGan, 1, 1)).unwrap();
        let before = t.model().clone();
        let batch = t.next_batch().unwrap();
        t.joint_step(&batch).unwrap();
        assert_eq!(t.model().discriminator, before.discriminator);
    }

    #[test]
    fn step_losses_at_symmetric_point() {
        let mut m = model();
        let out = &mut m.discriminator.layers_mut()[1];
        *out = DenseLayer::zeros(out.fan_in(), 1, Activation::Sigmoid);
        let x = data(40, 2);
        let mut t = Trainer::new(m, &x, config(TrainingMode::DecoupledBiGan, 1, 1)).unwrap();
        assert!((t.generator_step().unwrap() - LN2).abs() < 1e-12);
        let batch = t.next_batch().unwrap();
        assert!((t.encoder_step(&batch).unwrap() - LN2).abs() < 1e-12);
        assert!((t.discriminator_step(&batch).unwrap() - 2.0 * LN2).abs() < 1e-12);
    }

    #[test]
    fn discriminator_loss_decreases_on_fixed_batch() {
        let m = model();
        let x = data(16, 3);
        let z = sample_noise(16, 4, &mut ChaCha8Rng::seed_from_u64(4));
        let mut d = m.clone();
        let mut adam = adam_for(&d.discriminator, AdamConfig::default());
        let mut losses = Vec::new();
        for _ in 0..50 {
            let step = discriminator_gradients(&d, &x, &z).unwrap();
            losses.push(step.loss);
            apply(&mut d.discriminator, &mut adam, &step.grads, 0.002).unwrap();
        }
        for w in losses.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{losses:?}");
        }
        assert!(losses[49] < losses[0]);
    }

    #[test]
    fn step_counts_per_mode() {
        let x = data(40, 1);
        let run = |mode, n, k| train(model(), &x, &config(mode, n, k)).unwrap().state;

        let s = run(TrainingMode::DecoupledBiGan, 1, 3);
        assert_eq!(s.counts, StepCounts { discriminator: 1, generator: 3, encoder: 3 });
        assert_eq!(s.adam_steps(), s.counts);

        let s = run(TrainingMode::StandardBiGan, 2, 3);
        assert_eq!(s.counts, StepCounts { discriminator: 6, generator: 2, encoder: 2 });

        let s = run(TrainingMode::GenericGan, 2, 3);
        assert_eq!(s.counts, StepCounts { discriminator: 6, generator: 2, encoder: 0 });
        assert!(s.trace.encoder.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn generic_mode_leaves_encoder_untouched() {
        let x = data(40, 1);
        let m = model();
        let out = train(m.clone(), &x, &config(TrainingMode::GenericGan, 3, 2)).unwrap();
        assert!(!out.model.encoder_enabled);
        assert_eq!(out.model.encoder, m.encoder);
    }

    #[test]
    fn same_seed_same_checkpoint() {
        let x = data(60, 5);
        let c = config(TrainingMode::DecoupledBiGan, 5, 2);
        let a = train(model(), &x, &c).unwrap();
        let b = train(model(), &x, &c).unwrap();
        assert_eq!(a.model.to_checkpoint_bytes(), b.model.to_checkpoint_bytes());
        assert_eq!(a.state.trace, b.state.trace);
        let c2 = TrainingConfig { seed: 10, ..c };
        let other = train(model(), &x, &c2).unwrap();
        assert_ne!(a.model.checkpoint_hash(), other.model.checkpoint_hash());
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let x = data(40, 6);
        let m = model();
        for mode in TrainingMode::ALL {
            let c = TrainingConfig { learning_rate: 0.0, ..config(mode, 4, 2) };
            let out = train(m.clone(), &x, &c).unwrap();
            assert_eq!(out.model.encoder, m.encoder);
            assert_eq!(out.model.generator, m.generator);
            assert_eq!(out.model.discriminator, m.discriminator);
        }
    }

    #[test]
    fn zero_learning_rate_constant_traces_on_uniform_data() {
        let x = Matrix::filled(40, 12, 0.25);
        let mut m = model();
        let out = &mut m.discriminator.layers_mut()[1];
        *out = DenseLayer::zeros(out.fan_in(), 1, Activation::Sigmoid);
        let c = TrainingConfig { learning_rate: 0.0, ..config(TrainingMode::DecoupledBiGan, 6, 2) };
        let trace = train(m, &x, &c).unwrap().state.trace;
        for series in [&trace.discriminator, &trace.generator, &trace.encoder] {
            assert!(series.iter().all(|&v| v == series[0]), "{series:?}");
        }
        assert!((trace.discriminator[0] - 2.0 * LN2).abs() < 1e-12);
    }

    #[test]
    fn early_exit_shortens_inner_loop() {
        let x = data(40, 1);
        let c = TrainingConfig { early_exit: Some(1e6), ..config(TrainingMode::DecoupledBiGan, 3, 5) };
        let s = train(model(), &x, &c).unwrap().state;
        assert_eq!(s.counts, StepCounts { discriminator: 3, generator: 3, encoder: 3 });
    }

    #[test]
    fn divergence_names_the_iteration() {
        let x = data(40, 1);
        let mut m = model();
        for w in m.discriminator.layers_mut()[0].weights.data_mut() {
            *w = 1e308;
        }
        let err = train(m, &x, &config(TrainingMode::DecoupledBiGan, 3, 1)).unwrap_err();
        assert!(matches!(err, Error::NonFiniteLoss { iteration: 1, .. }), "{err}");
        assert!(err.to_string().contains("iteration 1"));
    }

    #[test]
    fn trace_csv_layout() {
        let x = data(40, 1);
        let out = train(model(), &x, &config(TrainingMode::DecoupledBiGan, 4, 1)).unwrap();
        let csv = out.state.trace.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "iteration,dloss,gloss,eloss");
        assert!(lines[4].starts_with("4,"));
        assert_eq!(lines[1].split(',').count(), 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn update_ratios_and_trace_lengths(n in 1usize..5, k in 1usize..5, mode_ix in 0usize..3) {
            let mode = TrainingMode::ALL[mode_ix];
            let x = data(30, 2);
            let s = train(model(), &x, &config(mode, n, k)).unwrap().state;
            let (n64, k64) = (n as u64, k as u64);
            let expected = match mode {
                TrainingMode::DecoupledBiGan => StepCounts { discriminator: n64, generator: n64 * k64, encoder: n64 * k64 },
                TrainingMode::StandardBiGan => StepCounts { discriminator: n64 * k64, generator: n64, encoder: n64 },
                TrainingMode::GenericGan => StepCounts { discriminator: n64 * k64, generator: n64, encoder: 0 },
            };
            prop_assert_eq!(s.counts, expected);
            prop_assert_eq!(s.trace.len(), n);
            prop_assert_eq!(s.iterations_completed, n);
            for series in [&s.trace.discriminator, &s.trace.generator, &s.trace.encoder] {
                prop_assert!(series.iter().all(|v| v.is_finite() && *v >= 0.0));
            }
        }
    }
}
