//! NSL-KDD text records.
//!
//! Each line holds 43 comma-separated fields: 41 connection features, the
//! attack label (`normal` for benign traffic) and a difficulty score.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FEATURE_COUNT: usize = 41;
pub const NUMERIC_COUNT: usize = 38;
pub const FIELD_COUNT: usize = FEATURE_COUNT + 2;

/// Positions of the symbolic features among the 41.
pub const SYMBOLIC_POSITIONS: [usize; 3] = [1, 2, 3];
pub const SYMBOLIC_NAMES: [&str; 3] = ["protocol_type", "service", "flag"];

pub const NORMAL_LABEL: &str = "normal";

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
];

/// Names of the 38 numeric features in file order.
pub fn numeric_feature_names() -> impl Iterator<Item = &'static str> {
    FEATURE_NAMES
        .iter()
        .enumerate()
        .filter(|(i, _)| !SYMBOLIC_POSITIONS.contains(i))
        .map(|(_, n)| *n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    /// The 38 numeric features in file order.
    pub numeric: Vec<f64>,
    /// `protocol_type`, `service`, `flag`.
    pub symbolic: [String; 3],
    pub label: String,
    /// Parsed for completeness; not used downstream.
    pub difficulty: u32,
}

impl RawRecord {
    pub fn is_normal(&self) -> bool {
        self.label == NORMAL_LABEL
    }

    /// 0 for normal traffic, 1 for every attack class.
    pub fn binary_label(&self) -> u8 {
        u8::from(!self.is_normal())
    }

    /// Parses one line. `line_no` is only used for error messages.
    pub fn parse_line(line: &str, path: &Path, line_no: usize) -> Result<Self> {
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            msg,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != FIELD_COUNT {
            return Err(err(format!(
                "expected {FIELD_COUNT} fields, found {}",
                fields.len()
            )));
        }
        let mut numeric = Vec::with_capacity(NUMERIC_COUNT);
        let mut symbolic: [String; 3] = Default::default();
        for (i, field) in fields[..FEATURE_COUNT].iter().enumerate() {
            if let Some(s) = SYMBOLIC_POSITIONS.iter().position(|&p| p == i) {
                if field.is_empty() {
                    return Err(err(format!("empty symbolic field {}", FEATURE_NAMES[i])));
                }
                symbolic[s] = (*field).to_owned();
            } else {
                let v: f64 = field.parse().map_err(|_| {
                    err(format!("{} is not numeric: {field:?}", FEATURE_NAMES[i]))
                })?;
                if !v.is_finite() {
                    return Err(err(format!("{} is not finite: {field:?}", FEATURE_NAMES[i])));
                }
                numeric.push(v);
            }
        }
        let label = fields[FEATURE_COUNT];
        if label.is_empty() {
            return Err(err("empty label".into()));
        }
        let difficulty = fields[FEATURE_COUNT + 1]
            .parse()
            .map_err(|_| err(format!("bad difficulty {:?}", fields[FEATURE_COUNT + 1])))?;
        Ok(Self {
            numeric,
            symbolic,
            label: label.to_owned(),
            difficulty,
        })
    }
}

/// Parses NSL-KDD text. Blank lines are skipped; line numbers are 1-based.
pub fn parse_nslkdd_str(text: &str, path: &Path) -> Result<Vec<RawRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| RawRecord::parse_line(l, path, i + 1))
        .collect()
}

pub fn parse_nslkdd(path: impl AsRef<Path>) -> Result<Vec<RawRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_nslkdd_str(&text, path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabelCounts {
    pub total: usize,
    pub normal: usize,
    pub others: usize,
}

pub fn label_counts(records: &[RawRecord]) -> LabelCounts {
    let normal = records.iter().filter(|r| r.is_normal()).count();
    LabelCounts {
        total: records.len(),
        normal,
        others: records.len() - normal,
    }
}
