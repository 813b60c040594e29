//! One-class network intrusion detection with a bidirectional GAN trained
//! under a decoupled schedule: the generator and encoder take `k` update
//! steps for every discriminator step. The trained encoder and discriminator
//! form a binary classifier that needs no anomaly score.
//!
//! Pipeline: [`data`] parses and encodes NSL-KDD records, [`model`] defines
//! the three networks, [`train`] runs one of three training schedules, and
//! [`eval`] classifies, scores and exports. [`experiment`] sweeps seeds and
//! modes in parallel.

pub mod data;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod model;
pub mod synthetic;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use model::{BiGanModel, ModelShape};
pub use tensor::Matrix;
pub use train::{train, TrainingConfig, TrainingMode};
