use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use bigan_core::data::{parse_nslkdd_str, prepare, EncodedDataset, LabelCounts};
use bigan_core::eval::{evaluate, export_latent, roc_curve, write_roc_csv};
use bigan_core::experiment::{run_benchmark, BenchmarkPlan, BenchmarkReport};
use bigan_core::model::sha256_hex;
use bigan_core::{train, BiGanModel, TrainingMode};
use serde::{Deserialize, Serialize};

use crate::config::Flags;
use crate::manifest::{DatasetHashes, RunManifest};

pub const TRAIN_CACHE: &str = "train_normal.bgds";
pub const TEST_CACHE: &str = "test.bgds";
pub const CODEC_FILE: &str = "codec.json";
pub const STAMP_FILE: &str = "preprocess.json";

/// Written last by `preprocess`; a matching stamp makes reruns a no-op.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PreprocessStamp {
    cache_version: u32,
    train_input_sha256: String,
    test_input_sha256: String,
    feature_width: usize,
    train_counts: LabelCounts,
    test_counts: LabelCounts,
    train_normal_rows: usize,
    outliers_removed: usize,
    outputs: BTreeMap<String, String>,
}

fn read_input(path: &Path) -> Result<(String, String)> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let hash = sha256_hex(&bytes);
    let text = String::from_utf8(bytes)
        .with_context(|| format!("{} is not UTF-8 text", path.display()))?;
    Ok((text, hash))
}

fn file_hash(path: &Path) -> Result<String> {
    Ok(sha256_hex(
        &fs::read(path).with_context(|| format!("cannot read {}", path.display()))?,
    ))
}

fn stamp_is_current(dir: &Path, train_hash: &str, test_hash: &str) -> Option<PreprocessStamp> {
    let text = fs::read_to_string(dir.join(STAMP_FILE)).ok()?;
    let stamp: PreprocessStamp = serde_json::from_str(&text).ok()?;
    let fresh = stamp.cache_version == bigan_core::data::dataset::CACHE_VERSION
        && stamp.train_input_sha256 == train_hash
        && stamp.test_input_sha256 == test_hash
        && stamp
            .outputs
            .iter()
            .all(|(name, hash)| file_hash(&dir.join(name)).is_ok_and(|h| &h == hash));
    fresh.then_some(stamp)
}

fn print_counts(stamp: &PreprocessStamp) {
    let t = &stamp.train_counts;
    let s = &stamp.test_counts;
    println!("train records: {} (normal {}, attack {})", t.total, t.normal, t.others);
    println!("test records:  {} (normal {}, attack {})", s.total, s.normal, s.others);
    println!("features:      {}", stamp.feature_width);
    println!(
        "normal training rows kept: {} ({} outliers removed)",
        stamp.train_normal_rows, stamp.outliers_removed
    );
}

pub fn preprocess(train_file: &Path, test_file: &Path, out_dir: &Path) -> Result<()> {
    let (train_text, train_hash) = read_input(train_file)?;
    let (test_text, test_hash) = read_input(test_file)?;
    if let Some(stamp) = stamp_is_current(out_dir, &train_hash, &test_hash) {
        println!("cache in {} is up to date", out_dir.display());
        print_counts(&stamp);
        return Ok(());
    }

    let train = parse_nslkdd_str(&train_text, train_file)?;
    let test = parse_nslkdd_str(&test_text, test_file)?;
    let data = prepare(&train, &test)?;

    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    // A stale stamp must not survive a partial rewrite.
    let _ = fs::remove_file(out_dir.join(STAMP_FILE));
    data.train_normal.write_cache(out_dir.join(TRAIN_CACHE))?;
    data.test.write_cache(out_dir.join(TEST_CACHE))?;
    data.codec.write_json(out_dir.join(CODEC_FILE))?;

    let mut outputs = BTreeMap::new();
    for name in [TRAIN_CACHE, TEST_CACHE, CODEC_FILE] {
        outputs.insert(name.to_string(), file_hash(&out_dir.join(name))?);
    }
    let stamp = PreprocessStamp {
        cache_version: bigan_core::data::dataset::CACHE_VERSION,
        train_input_sha256: train_hash,
        test_input_sha256: test_hash,
        feature_width: data.codec.width(),
        train_counts: data.train_counts,
        test_counts: data.test_counts,
        train_normal_rows: data.train_normal.len(),
        outliers_removed: data.outliers_removed,
        outputs,
    };
    fs::write(
        out_dir.join(STAMP_FILE),
        serde_json::to_string_pretty(&stamp)? + "\n",
    )?;
    print_counts(&stamp);
    println!("wrote {}", out_dir.display());
    Ok(())
}

struct Cached {
    train_normal: EncodedDataset,
    test: EncodedDataset,
    hashes: DatasetHashes,
}

fn load_cache(data_dir: &Path) -> Result<Cached> {
    let train_path = data_dir.join(TRAIN_CACHE);
    let test_path = data_dir.join(TEST_CACHE);
    if !train_path.exists() || !test_path.exists() {
        bail!(
            "no preprocessed data in {} (run `bigan preprocess` first)",
            data_dir.display()
        );
    }
    Ok(Cached {
        train_normal: EncodedDataset::read_cache(&train_path)
            .with_context(|| format!("cannot load {}", train_path.display()))?,
        test: EncodedDataset::read_cache(&test_path)
            .with_context(|| format!("cannot load {}", test_path.display()))?,
        hashes: DatasetHashes {
            train_normal: file_hash(&train_path)?,
            test: file_hash(&test_path)?,
        },
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

pub fn train_command(data_dir: Option<&Path>, flags: Flags, manifest: Option<&Path>) -> Result<()> {
    let replay = manifest.map(RunManifest::read).transpose()?;
    let settings = flags.resolve()?;
    let data_dir = data_dir
        .map(Path::to_path_buf)
        .or_else(|| replay.as_ref().map(|m| m.data_dir.clone()))
        .context("--data-dir is required unless --manifest is given")?;

    let cached = load_cache(&data_dir)?;
    let width = cached.train_normal.width();
    let (config, shape, threshold) = match &replay {
        Some(m) => {
            ensure!(
                m.dataset_sha256 == cached.hashes,
                "preprocessed data in {} differs from the data recorded in the manifest",
                data_dir.display()
            );
            (m.config.clone(), m.shape.clone(), m.threshold)
        }
        None => (settings.training.clone(), settings.shape(width), settings.eval.threshold),
    };
    ensure!(
        shape.feature_width == width,
        "manifest expects {} features but {} has {}",
        shape.feature_width,
        data_dir.display(),
        width
    );
    let out_dir = settings.out_dir;

    create_dir(&out_dir)?;
    let started = Instant::now();
    let model = BiGanModel::init(shape.clone(), config.seed)?;
    let outcome = train(model, &cached.train_normal.features, &config)?;
    let duration = started.elapsed().as_secs_f64();

    let checkpoint = out_dir.join("model.ckpt");
    let trace_path = out_dir.join("loss_trace.csv");
    outcome.model.save(&checkpoint)?;
    outcome.state.trace.write_csv(&trace_path)?;
    let hash = outcome.model.checkpoint_hash();

    let trace = &outcome.state.trace;
    let last = trace.len() - 1;
    println!(
        "trained {} for {} iterations (k={}, seed {}) in {:.1}s",
        config.mode, trace.len(), config.k_steps, config.seed, duration
    );
    println!(
        "final losses: D {:.4}  G {:.4}  E {:.4}",
        trace.discriminator[last], trace.generator[last], trace.encoder[last]
    );
    println!("checkpoint {} sha256 {hash}", checkpoint.display());

    let manifest_out = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        config,
        shape,
        threshold,
        data_dir,
        dataset_sha256: cached.hashes,
        checkpoint,
        checkpoint_sha256: hash.clone(),
        loss_trace: trace_path,
        report: None,
        roc: None,
        duration_secs: duration,
    };
    manifest_out.write(&out_dir.join("manifest.json"))?;

    if let Some(m) = &replay {
        ensure!(
            m.checkpoint_sha256 == hash,
            "replay produced checkpoint {hash}, manifest records {}",
            m.checkpoint_sha256
        );
        println!("checkpoint matches the manifest");
    }
    Ok(())
}

fn check_compatible(model: &BiGanModel, data: &EncodedDataset, dir: &Path) -> Result<()> {
    ensure!(
        model.feature_width() == data.width(),
        "checkpoint expects {} features but the data in {} has {}",
        model.feature_width(),
        dir.display(),
        data.width()
    );
    Ok(())
}

pub fn evaluate_command(
    checkpoint: &Path,
    data_dir: &Path,
    flags: Flags,
    latent: bool,
    manifest: Option<&Path>,
) -> Result<()> {
    let settings = flags.resolve()?;
    let model = BiGanModel::load(checkpoint)
        .with_context(|| format!("cannot load checkpoint {}", checkpoint.display()))?;
    let cached = load_cache(data_dir)?;
    check_compatible(&model, &cached.test, data_dir)?;

    let report = evaluate(&model, &cached.test, &settings.eval)?;
    create_dir(&settings.out_dir)?;
    let report_path = settings.out_dir.join("report.json");
    report.write_json(&report_path)?;

    let roc_path = settings.out_dir.join("roc.csv");
    if report.auc.is_some() {
        write_roc_csv(&roc_curve(&report.probabilities, &cached.test.labels)?, &roc_path)?;
    }
    if latent {
        export_latent(&model, &cached.test, settings.out_dir.join("latent.csv"))?;
    }

    let c = report.confusion;
    println!("samples {}  threshold {}", report.samples, report.threshold);
    println!("TP {}  TN {}  FP {}  FN {}", c.tp, c.tn, c.fp, c.fn_);
    println!(
        "accuracy {:.4}  precision {:.4}  recall {:.4}  f1 {:.4}  auc {}",
        report.accuracy,
        report.precision,
        report.recall,
        report.f1,
        report.auc.map_or("-".to_string(), |a| format!("{a:.4}"))
    );
    for name in &report.undefined_metrics {
        eprintln!("warning: {name} has a zero denominator and is reported as 0");
    }
    println!("wrote {}", report_path.display());

    if let Some(path) = manifest {
        let mut m = RunManifest::read(path)?;
        m.report = Some(report_path);
        m.roc = report.auc.map(|_| roc_path);
        m.write(path)?;
    }
    Ok(())
}

pub fn benchmark_command(
    data_dir: &Path,
    flags: Flags,
    seeds: Vec<u64>,
    k_values: Vec<usize>,
    modes: Vec<TrainingMode>,
) -> Result<BenchmarkReport> {
    let settings = flags.resolve()?;
    let cached = load_cache(data_dir)?;
    let plan = BenchmarkPlan {
        modes,
        k_values: k_values.clone(),
        seeds,
        shape: settings.shape(cached.train_normal.width()),
        base: settings.training,
        eval: settings.eval,
        jobs: settings.jobs,
    };
    let report = run_benchmark(&plan, &cached.train_normal.features, &cached.test)?;

    create_dir(&settings.out_dir)?;
    report.write_json(settings.out_dir.join("benchmark.json"))?;
    let table = report.table();
    fs::write(settings.out_dir.join("benchmark.txt"), &table)?;
    print!("{table}");
    for run in &report.runs {
        if let Err(e) = &run.outcome {
            eprintln!(
                "run {} k={} seed {} failed: {e}",
                run.spec.mode, run.spec.k_steps, run.spec.seed
            );
        }
    }
    for &k in &k_values {
        let Some(ours) = report
            .row(TrainingMode::DecoupledBiGan, k)
            .and_then(|r| r.f1)
        else {
            continue;
        };
        for other in [TrainingMode::StandardBiGan, TrainingMode::GenericGan] {
            if let Some(theirs) = report.row(other, k).and_then(|r| r.f1) {
                let verdict = if ours.median > theirs.median { "higher" } else { "not higher" };
                println!(
                    "k={k}: decoupled-bigan median F1 {:.4} is {verdict} than {other} {:.4}",
                    ours.median, theirs.median
                );
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Split {
    Train,
    Test,
}

pub fn export_command(checkpoint: &Path, data_dir: &Path, split: Split, out: &Path) -> Result<()> {
    let model = BiGanModel::load(checkpoint)
        .with_context(|| format!("cannot load checkpoint {}", checkpoint.display()))?;
    let cached = load_cache(data_dir)?;
    let data = match split {
        Split::Train => &cached.train_normal,
        Split::Test => &cached.test,
    };
    check_compatible(&model, data, data_dir)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let export = export_latent(&model, data, out)?;
    if export.rank_deficient {
        eprintln!("warning: latent codes span fewer than two directions; missing PCA columns are 0");
    }
    println!("wrote {} rows to {}", export.labels.len(), out.display());
    Ok(())
}
