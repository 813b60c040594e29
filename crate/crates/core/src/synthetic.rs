//! Seeded generator for NSL-KDD-formatted text.
//!
//! Produces 43-field lines with the real feature layout: benign traffic
//! resembling ordinary HTTP/SMTP/DNS sessions and attack traffic drawn from
//! four stereotyped families (SYN flood, ICMP sweep, port scan, password
//! guessing). The test split also uses a service never seen in training.
//! Used as a fixture wherever the public NSL-KDD files are unavailable.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::record::FEATURE_NAMES;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticCorpus {
    pub train_normal: usize,
    pub train_attack: usize,
    pub test_normal: usize,
    pub test_attack: usize,
}

impl Default for SyntheticCorpus {
    fn default() -> Self {
        Self {
            train_normal: 1200,
            train_attack: 900,
            test_normal: 500,
            test_attack: 650,
        }
    }
}

struct Line {
    values: Vec<String>,
}

impl Line {
    fn new(protocol: &str, service: &str, flag: &str) -> Self {
        let mut values = vec!["0".to_string(); FEATURE_NAMES.len()];
        values[1] = protocol.into();
        values[2] = service.into();
        values[3] = flag.into();
        Self { values }
    }

    fn set(&mut self, name: &str, v: f64) -> &mut Self {
        let i = FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .expect("known feature name");
        self.values[i] = if v.fract() == 0.0 {
            format!("{}", v as i64)
        } else {
            format!("{v:.2}")
        };
        self
    }

    fn finish(&self, label: &str, difficulty: u32) -> String {
        format!("{},{label},{difficulty}", self.values.join(","))
    }
}

fn rate<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo..=hi) * 100.0).round() / 100.0
}

fn normal_line<R: Rng>(rng: &mut R) -> String {
    let (protocol, service) = *[
        ("tcp", "http"),
        ("tcp", "http"),
        ("tcp", "http"),
        ("tcp", "smtp"),
        ("udp", "domain_u"),
        ("tcp", "ftp_data"),
        ("udp", "ntp_u"),
    ]
    .choose(rng)
    .unwrap();
    let flag = if rng.random_bool(0.97) { "SF" } else { "RSTO" };
    let mut l = Line::new(protocol, service, flag);
    l.set("duration", if rng.random_bool(0.9) { 0.0 } else { rng.random_range(1..30) as f64 })
        .set("src_bytes", rng.random_range(150..1500) as f64)
        .set("dst_bytes", rng.random_range(200..9000) as f64)
        .set("logged_in", if protocol == "tcp" { 1.0 } else { 0.0 })
        .set("hot", if rng.random_bool(0.03) { 1.0 } else { 0.0 })
        .set("count", rng.random_range(1..15) as f64)
        .set("srv_count", rng.random_range(1..20) as f64)
        .set("same_srv_rate", 1.0)
        .set("diff_srv_rate", rate(rng, 0.0, 0.05))
        .set("srv_diff_host_rate", rate(rng, 0.0, 0.2))
        .set("dst_host_count", rng.random_range(5..255) as f64)
        .set("dst_host_srv_count", rng.random_range(100..255) as f64)
        .set("dst_host_same_srv_rate", rate(rng, 0.8, 1.0))
        .set("dst_host_diff_srv_rate", rate(rng, 0.0, 0.04))
        .set("dst_host_same_src_port_rate", rate(rng, 0.0, 0.1))
        .set("dst_host_srv_diff_host_rate", rate(rng, 0.0, 0.05));
    l.finish("normal", rng.random_range(15..=21))
}

fn attack_line<R: Rng>(rng: &mut R, unseen_service: bool) -> String {
    match rng.random_range(0..4) {
        0 => {
            let service = *["private", "http", "other"].choose(rng).unwrap();
            let mut l = Line::new("tcp", service, "S0");
            l.set("count", rng.random_range(100..511) as f64)
                .set("srv_count", rng.random_range(1..30) as f64)
                .set("serror_rate", 1.0)
                .set("srv_serror_rate", 1.0)
                .set("same_srv_rate", rate(rng, 0.0, 0.1))
                .set("diff_srv_rate", rate(rng, 0.05, 0.08))
                .set("dst_host_count", 255.0)
                .set("dst_host_srv_count", rng.random_range(1..30) as f64)
                .set("dst_host_same_srv_rate", rate(rng, 0.0, 0.1))
                .set("dst_host_diff_srv_rate", rate(rng, 0.05, 0.1))
                .set("dst_host_serror_rate", 1.0)
                .set("dst_host_srv_serror_rate", 1.0);
            l.finish("neptune", rng.random_range(18..=21))
        }
        1 => {
            let service = *["ecr_i", "eco_i"].choose(rng).unwrap();
            let mut l = Line::new("icmp", service, "SF");
            l.set("src_bytes", *[520.0, 1032.0, 8.0].choose(rng).unwrap())
                .set("count", rng.random_range(50..511) as f64)
                .set("srv_count", rng.random_range(50..511) as f64)
                .set("same_srv_rate", 1.0)
                .set("srv_diff_host_rate", rate(rng, 0.0, 1.0))
                .set("dst_host_count", rng.random_range(1..255) as f64)
                .set("dst_host_srv_count", rng.random_range(1..255) as f64)
                .set("dst_host_same_srv_rate", 1.0)
                .set("dst_host_same_src_port_rate", rate(rng, 0.5, 1.0));
            l.finish(if service == "ecr_i" { "smurf" } else { "ipsweep" }, 18)
        }
        2 => {
            let service = if unseen_service {
                "sunrpc"
            } else {
                *["private", "other", "telnet", "finger"].choose(rng).unwrap()
            };
            let mut l = Line::new("tcp", service, "REJ");
            l.set("count", rng.random_range(1..200) as f64)
                .set("srv_count", rng.random_range(1..10) as f64)
                .set("rerror_rate", 1.0)
                .set("srv_rerror_rate", 1.0)
                .set("same_srv_rate", rate(rng, 0.0, 0.3))
                .set("diff_srv_rate", rate(rng, 0.5, 1.0))
                .set("dst_host_count", rng.random_range(1..255) as f64)
                .set("dst_host_srv_count", rng.random_range(1..20) as f64)
                .set("dst_host_diff_srv_rate", rate(rng, 0.5, 1.0))
                .set("dst_host_rerror_rate", rate(rng, 0.8, 1.0))
                .set("dst_host_srv_rerror_rate", rate(rng, 0.8, 1.0));
            l.finish("portsweep", rng.random_range(10..=20))
        }
        _ => {
            let mut l = Line::new("tcp", "telnet", "SF");
            l.set("duration", rng.random_range(1..10) as f64)
                .set("src_bytes", rng.random_range(100..140) as f64)
                .set("dst_bytes", rng.random_range(150..250) as f64)
                .set("hot", rng.random_range(0..3) as f64)
                .set("num_failed_logins", 1.0)
                .set("count", 1.0)
                .set("srv_count", 1.0)
                .set("same_srv_rate", 1.0)
                .set("dst_host_count", rng.random_range(1..50) as f64)
                .set("dst_host_srv_count", rng.random_range(1..50) as f64)
                .set("dst_host_same_srv_rate", rate(rng, 0.5, 1.0))
                .set("dst_host_same_src_port_rate", rate(rng, 0.0, 0.5));
            l.finish("guess_passwd", rng.random_range(5..=15))
        }
    }
}

impl SyntheticCorpus {
    fn text(&self, normal: usize, attack: usize, test: bool, seed: u64) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lines = Vec::with_capacity(normal + attack);
        lines.extend((0..normal).map(|_| normal_line(&mut rng)));
        lines.extend((0..attack).map(|_| attack_line(&mut rng, test)));
        // interleave deterministically
        for i in (1..lines.len()).rev() {
            let j = rng.random_range(0..=i);
            lines.swap(i, j);
        }
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    pub fn train_text(&self, seed: u64) -> String {
        self.text(self.train_normal, self.train_attack, false, seed)
    }

    pub fn test_text(&self, seed: u64) -> String {
        self.text(
            self.test_normal,
            self.test_attack,
            true,
            seed.wrapping_add(0x9E37_79B9),
        )
    }

    /// Writes `KDDTrain+.txt` and `KDDTest+.txt` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>, seed: u64) -> Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let train = dir.join("KDDTrain+.txt");
        let test = dir.join("KDDTest+.txt");
        fs::write(&train, self.train_text(seed))?;
        fs::write(&test, self.test_text(seed))?;
        Ok((train, test))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::record::{label_counts, parse_nslkdd_str};

    #[test]
    fn counts_and_format() {
        let c = SyntheticCorpus::default();
        let recs = parse_nslkdd_str(&c.train_text(1), Path::new("t")).unwrap();
        let counts = label_counts(&recs);
        assert_eq!(counts.total, c.train_normal + c.train_attack);
        assert_eq!(counts.normal, c.train_normal);
    }

    #[test]
    fn seeded() {
        let c = SyntheticCorpus::default();
        assert_eq!(c.test_text(9), c.test_text(9));
        assert_ne!(c.test_text(9), c.test_text(10));
    }
}
