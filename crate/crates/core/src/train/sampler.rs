use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

/// `batch_size` distinct row indices drawn uniformly from `0..n`.
pub fn sample_batch_indices<R: Rng + ?Sized>(
    n: usize,
    batch_size: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_batch(n, batch_size)?;
    Ok(index::sample(rng, n, batch_size).into_vec())
}

pub(crate) fn check_batch(n: usize, batch_size: usize) -> Result<()> {
    if batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    if batch_size > n {
        return Err(Error::Config(format!(
            "batch size {batch_size} exceeds the {n} available rows"
        )));
    }
    Ok(())
}

/// Endless stream of independent batches: no repeats inside a batch, but a
/// row may appear again in later batches.
#[derive(Debug, Clone)]
pub struct MinibatchSampler<R> {
    n: usize,
    batch_size: usize,
    rng: R,
}

impl<R: Rng> MinibatchSampler<R> {
    pub fn new(n: usize, batch_size: usize, rng: R) -> Result<Self> {
        check_batch(n, batch_size)?;
        Ok(Self { n, batch_size, rng })
    }
}

impl<R: Rng> Iterator for MinibatchSampler<R> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        Some(index::sample(&mut self.rng, self.n, self.batch_size).into_vec())
    }
}
