//! Feature encoding: one-hot blocks for the symbolic features, outlier
//! cutoffs and min-max scaling statistics.
//!
//! Encoded column layout: the 38 numeric features in file order, then one
//! indicator block per symbolic feature (`protocol_type`, `service`, `flag`),
//! each block ordered lexicographically by category.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::record::{numeric_feature_names, RawRecord, NUMERIC_COUNT, SYMBOLIC_NAMES};
use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Percentile used for outlier cutoffs.
pub const OUTLIER_PERCENTILE: usize = 95;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub feature: String,
    /// Sorted, distinct.
    pub categories: Vec<String>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn index_of(&self, category: &str) -> Option<usize> {
        self.categories
            .binary_search_by(|c| c.as_str().cmp(category))
            .ok()
    }
}

/// Distinct categories per symbolic feature, lexicographically ordered.
pub fn fit_vocabularies(records: &[RawRecord]) -> Result<Vec<Vocabulary>> {
    if records.is_empty() {
        return Err(Error::Empty("vocabulary fitting records"));
    }
    Ok(SYMBOLIC_NAMES
        .iter()
        .enumerate()
        .map(|(s, name)| {
            let set: BTreeSet<&str> = records.iter().map(|r| r.symbolic[s].as_str()).collect();
            Vocabulary {
                feature: (*name).to_owned(),
                categories: set.into_iter().map(str::to_owned).collect(),
            }
        })
        .collect())
}

/// Value at 1-based rank `⌈p·n/100⌉` of the ascending sample.
pub fn nearest_rank_percentile(sorted: &[f64], percent: usize) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (percent * sorted.len()).div_ceil(100).max(1);
    Some(sorted[rank.min(sorted.len()) - 1])
}

/// Everything fitted on training data and reused, unchanged, for test data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCodec {
    pub vocabularies: Vec<Vocabulary>,
    /// Per encoded column, in raw (pre-scaling) units.
    pub cutoffs: Vec<f64>,
    /// Per encoded column, after outlier removal.
    pub minimums: Vec<f64>,
    pub maximums: Vec<f64>,
}

impl FeatureCodec {
    /// Vocabularies, cutoffs and scaling statistics all from `records`.
    pub fn fit(records: &[RawRecord]) -> Result<Self> {
        Self::fit_split(records, records)
    }

    /// Vocabularies from `vocabulary_source`; cutoffs and min/max from
    /// `stats_source` (cutoffs before, min/max after outlier removal).
    pub fn fit_split(vocabulary_source: &[RawRecord], stats_source: &[RawRecord]) -> Result<Self> {
        if stats_source.is_empty() {
            return Err(Error::Empty("codec statistics records"));
        }
        let mut codec = Self {
            vocabularies: fit_vocabularies(vocabulary_source)?,
            cutoffs: Vec::new(),
            minimums: Vec::new(),
            maximums: Vec::new(),
        };
        let encoded = codec.one_hot_encode(stats_source);
        codec.cutoffs = column_cutoffs(&encoded);
        let (kept, _) = codec.remove_outliers(&encoded)?;
        let (mins, maxs) = column_ranges(&kept);
        codec.minimums = mins;
        codec.maximums = maxs;
        Ok(codec)
    }

    /// `38 + Σ vocabulary sizes`.
    pub fn width(&self) -> usize {
        NUMERIC_COUNT + self.vocabularies.iter().map(Vocabulary::len).sum::<usize>()
    }

    /// First encoded column of each symbolic block.
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut offset = NUMERIC_COUNT;
        self.vocabularies
            .iter()
            .map(|v| {
                let start = offset;
                offset += v.len();
                start
            })
            .collect()
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = numeric_feature_names().map(str::to_owned).collect();
        for v in &self.vocabularies {
            names.extend(v.categories.iter().map(|c| format!("{}={c}", v.feature)));
        }
        names
    }

    /// Numeric columns pass through; each symbolic value becomes an indicator
    /// column. Categories not in the vocabulary encode as an all-zero block.
    pub fn one_hot_encode(&self, records: &[RawRecord]) -> Matrix {
        let width = self.width();
        let offsets = self.block_offsets();
        let mut data = vec![0.0; records.len() * width];
        for (row, r) in data.chunks_exact_mut(width).zip(records) {
            row[..NUMERIC_COUNT].copy_from_slice(&r.numeric);
            for ((vocab, &off), value) in self.vocabularies.iter().zip(&offsets).zip(&r.symbolic) {
                if let Some(i) = vocab.index_of(value) {
                    row[off + i] = 1.0;
                }
            }
        }
        Matrix::new(records.len(), width, data).expect("finite encoded features")
    }

    /// Category whose indicator is set in `row`'s block for symbolic feature
    /// `feature`, or `None` for an all-zero block.
    pub fn decode_category(&self, row: &[f64], feature: usize) -> Option<&str> {
        let vocab = self.vocabularies.get(feature)?;
        let off = *self.block_offsets().get(feature)?;
        let block = row.get(off..off + vocab.len())?;
        block
            .iter()
            .position(|&v| v == 1.0)
            .map(|i| vocab.categories[i].as_str())
    }

    fn check_width(&self, m: &Matrix, op: &'static str) -> Result<()> {
        if m.cols() != self.width() || self.cutoffs.len() != self.width() {
            return Err(Error::shape(op, m.shape(), (self.cutoffs.len(), self.width())));
        }
        Ok(())
    }

    /// Drops every row with a value strictly above its column cutoff.
    /// Returns the kept rows and the indices of the dropped ones.
    pub fn remove_outliers(&self, m: &Matrix) -> Result<(Matrix, Vec<usize>)> {
        self.check_width(m, "remove_outliers")?;
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for (i, row) in m.iter_rows().enumerate() {
            if row.iter().zip(&self.cutoffs).any(|(v, c)| v > c) {
                dropped.push(i);
            } else {
                kept.push(i);
            }
        }
        Ok((m.select_rows(&kept)?, dropped))
    }

    /// `(v − min) / (max − min)` clipped to `[0, 1]`. A column with zero
    /// range maps values at or below its constant to 0 and above it to 1.
    pub fn minmax_normalize(&self, m: &Matrix) -> Result<Matrix> {
        if m.cols() != self.width() || self.minimums.len() != self.width() {
            return Err(Error::shape(
                "minmax_normalize",
                m.shape(),
                (self.minimums.len(), self.width()),
            ));
        }
        let mut out = m.clone();
        for r in 0..out.rows() {
            let row = out.row_mut(r);
            for ((cell, &lo), &hi) in row.iter_mut().zip(&self.minimums).zip(&self.maximums) {
                let v = *cell;
                *cell = if hi > lo {
                    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else if v > hi {
                    1.0
                } else {
                    0.0
                };
            }
        }
        Ok(out)
    }
}

/// Nearest-rank 95th percentile of each column.
pub fn column_cutoffs(m: &Matrix) -> Vec<f64> {
    (0..m.cols())
        .map(|c| {
            let mut col = m.column(c);
            col.sort_by(f64::total_cmp);
            nearest_rank_percentile(&col, OUTLIER_PERCENTILE).unwrap_or(0.0)
        })
        .collect()
}

fn column_ranges(m: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let mut mins = vec![f64::INFINITY; m.cols()];
    let mut maxs = vec![f64::NEG_INFINITY; m.cols()];
    for row in m.iter_rows() {
        for (c, &v) in row.iter().enumerate() {
            mins[c] = mins[c].min(v);
            maxs[c] = maxs[c].max(v);
        }
    }
    // every row was an outlier: fall back to a degenerate [0, 0] range
    for (lo, hi) in mins.iter_mut().zip(maxs.iter_mut()) {
        if !lo.is_finite() || !hi.is_finite() {
            *lo = 0.0;
            *hi = 0.0;
        }
    }
    (mins, maxs)
}
