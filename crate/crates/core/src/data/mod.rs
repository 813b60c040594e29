//! NSL-KDD ingestion and preprocessing: parsing, one-hot encoding, outlier
//! removal and min-max scaling into 122 features on the standard split.

pub mod codec;
pub mod dataset;
pub mod record;

pub use codec::{fit_vocabularies, nearest_rank_percentile, FeatureCodec, Vocabulary};
pub use dataset::{build_datasets, prepare, EncodedDataset, PreparedData, Provenance};
pub use record::{label_counts, parse_nslkdd, parse_nslkdd_str, LabelCounts, RawRecord};
