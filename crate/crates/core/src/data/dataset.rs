//! Encoded datasets, the end-to-end preprocessing pipeline and the on-disk
//! dataset cache.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::codec::FeatureCodec;
use super::record::{label_counts, parse_nslkdd, LabelCounts, RawRecord};
use crate::error::{Error, Result};
use crate::tensor::Matrix;

const CACHE_MAGIC: &[u8; 4] = b"BGDS";
pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    TrainNormal,
    TrainFull,
    Test,
}

impl Provenance {
    fn code(self) -> u8 {
        match self {
            Provenance::TrainNormal => 0,
            Provenance::TrainFull => 1,
            Provenance::Test => 2,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Provenance::TrainNormal),
            1 => Some(Provenance::TrainFull),
            2 => Some(Provenance::Test),
            _ => None,
        }
    }
}

/// Scaled features (one row per record, values in `[0, 1]`) with binary
/// labels: 0 normal, 1 anomalous.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub provenance: Provenance,
}

impl EncodedDataset {
    pub fn new(features: Matrix, labels: Vec<u8>, provenance: Provenance) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::shape(
                "EncodedDataset::new",
                features.shape(),
                (labels.len(), 1),
            ));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::Domain {
                op: "EncodedDataset::new",
                detail: "labels must be 0 or 1".into(),
            });
        }
        Ok(Self {
            features,
            labels,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.features.cols()
    }

    pub fn anomaly_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    /// Encodes `records` with a fitted codec (no outlier removal).
    pub fn encode(
        records: &[RawRecord],
        codec: &FeatureCodec,
        provenance: Provenance,
    ) -> Result<Self> {
        let features = codec.minmax_normalize(&codec.one_hot_encode(records))?;
        let labels = records.iter().map(RawRecord::binary_label).collect();
        Self::new(features, labels, provenance)
    }

    /// Serialises as: magic, version, n, width, provenance, labels, then
    /// row-major little-endian `f64` features.
    pub fn write_cache(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut buf = Vec::with_capacity(32 + self.len() * (1 + 8 * self.width()));
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.len() as u64).to_le_bytes());
        buf.extend_from_slice(&(self.width() as u64).to_le_bytes());
        buf.push(self.provenance.code());
        buf.extend_from_slice(&self.labels);
        for v in self.features.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let mut f = fs::File::create(path)?;
        f.write_all(&buf)?;
        Ok(())
    }

    pub fn read_cache(path: impl AsRef<Path>) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_cache_bytes(&bytes)
    }

    pub fn from_cache_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Format {
            kind: "dataset cache",
            msg: msg.to_owned(),
        };
        let mut r = ByteReader::new(bytes);
        if r.take(4).ok_or_else(|| bad("truncated header"))? != CACHE_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = r.u32().ok_or_else(|| bad("truncated header"))?;
        if version != CACHE_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let n = r.u64().ok_or_else(|| bad("truncated header"))? as usize;
        let width = r.u64().ok_or_else(|| bad("truncated header"))? as usize;
        let provenance = r
            .take(1)
            .and_then(|b| Provenance::from_code(b[0]))
            .ok_or_else(|| bad("bad provenance"))?;
        let labels = r.take(n).ok_or_else(|| bad("truncated labels"))?.to_vec();
        let count = n
            .checked_mul(width)
            .ok_or_else(|| bad("implausible dimensions"))?;
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            data.push(r.f64().ok_or_else(|| bad("truncated features"))?);
        }
        if !r.is_empty() {
            return Err(bad("trailing bytes"));
        }
        Self::new(Matrix::new(n, width, data)?, labels, provenance)
    }
}

pub(crate) struct ByteReader<'a> {
    bytes: &'a [u8],
}

impl<'a> ByteReader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Self { bytes }
    }

    pub(crate) fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        if self.bytes.len() < n {
            return None;
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Some(head)
    }

    pub(crate) fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_le_bytes(b.try_into().unwrap()))
    }

    pub(crate) fn f64(&mut self) -> Option<f64> {
        self.take(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()))
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

/// Output of [`build_datasets`].
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub codec: FeatureCodec,
    /// Normal training records after outlier removal.
    pub train_normal: EncodedDataset,
    /// Every training record, scaled with the same codec, no outlier removal.
    pub train_full: EncodedDataset,
    /// Every test record, no outlier removal.
    pub test: EncodedDataset,
    pub train_counts: LabelCounts,
    pub test_counts: LabelCounts,
    /// Normal training records removed as outliers.
    pub outliers_removed: usize,
}

/// Runs the whole preprocessing pipeline on parsed records.
///
/// Vocabularies come from every training record; cutoffs and scaling
/// statistics from the normal training records only.
pub fn prepare(train: &[RawRecord], test: &[RawRecord]) -> Result<PreparedData> {
    let normals: Vec<RawRecord> = train.iter().filter(|r| r.is_normal()).cloned().collect();
    if normals.is_empty() {
        return Err(Error::Empty("normal training records"));
    }
    let codec = FeatureCodec::fit_split(train, &normals)?;

    let encoded = codec.one_hot_encode(&normals);
    let (kept, dropped) = codec.remove_outliers(&encoded)?;
    let train_normal = EncodedDataset::new(
        codec.minmax_normalize(&kept)?,
        vec![0; kept.rows()],
        Provenance::TrainNormal,
    )?;

    Ok(PreparedData {
        train_full: EncodedDataset::encode(train, &codec, Provenance::TrainFull)?,
        test: EncodedDataset::encode(test, &codec, Provenance::Test)?,
        train_normal,
        train_counts: label_counts(train),
        test_counts: label_counts(test),
        outliers_removed: dropped.len(),
        codec,
    })
}

/// Parses both NSL-KDD files and runs [`prepare`].
pub fn build_datasets(train_path: impl AsRef<Path>, test_path: impl AsRef<Path>) -> Result<PreparedData> {
    let train = parse_nslkdd(train_path)?;
    let test = parse_nslkdd(test_path)?;
    prepare(&train, &test)
}

impl FeatureCodec {
    /// Pretty-printed JSON sidecar.
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::record::parse_nslkdd_str;
    use crate::synthetic::SyntheticCorpus;

    fn corpus() -> (Vec<RawRecord>, Vec<RawRecord>) {
        let c = SyntheticCorpus::default();
        let p = Path::new("synthetic");
        let train = parse_nslkdd_str(&c.train_text(3), p).unwrap();
        let test = parse_nslkdd_str(&c.test_text(4), p).unwrap();
        (train, test)
    }

    #[test]
    fn pipeline_invariants() {
        let (train, test) = corpus();
        let d = prepare(&train, &test).unwrap();
        assert!(d.train_normal.len() <= d.train_counts.normal);
        assert_eq!(
            d.train_normal.len() + d.outliers_removed,
            d.train_counts.normal
        );
        assert_eq!(d.test.len(), test.len());
        assert_eq!(d.test.anomaly_count(), d.test_counts.others);
        for ds in [&d.train_normal, &d.train_full, &d.test] {
            assert_eq!(ds.width(), d.codec.width());
            assert!(ds.features.data().iter().all(|v| (0.0..=1.0).contains(v)));
        }
        assert!(d.train_normal.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn pipeline_is_bit_identical_across_runs() {
        let (train, test) = corpus();
        let a = prepare(&train, &test).unwrap();
        let b = prepare(&train, &test).unwrap();
        assert_eq!(a.codec, b.codec);
        assert_eq!(a.train_normal, b.train_normal);
        assert_eq!(a.test, b.test);
    }

    #[test]
    fn cache_round_trip() {
        let (train, test) = corpus();
        let d = prepare(&train, &test).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("test.bgds");
        d.test.write_cache(&path).unwrap();
        assert_eq!(EncodedDataset::read_cache(&path).unwrap(), d.test);

        let codec_path = dir.path().join("codec.json");
        d.codec.write_json(&codec_path).unwrap();
        assert_eq!(FeatureCodec::read_json(&codec_path).unwrap(), d.codec);
    }

    #[test]
    fn corrupt_cache_is_rejected() {
        assert!(EncodedDataset::from_cache_bytes(b"nope").is_err());
        let ds = EncodedDataset::new(Matrix::filled(2, 3, 0.5), vec![0, 1], Provenance::Test)
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.bgds");
        ds.write_cache(&path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes.pop();
        assert!(EncodedDataset::from_cache_bytes(&bytes).is_err());
    }

    #[test]
    fn labels_are_validated() {
        assert!(EncodedDataset::new(Matrix::zeros(1, 1), vec![2], Provenance::Test).is_err());
        assert!(EncodedDataset::new(Matrix::zeros(2, 1), vec![0], Provenance::Test).is_err());
    }
}
