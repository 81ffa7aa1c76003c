//! Leave-One-Subject-Out evaluation, the hidden-unit sweep, and zero-shot
//! scoring.
//!
//! Folds are independent, so they can run in parallel; each fold derives
//! its RNG seed from the global seed and the held-out subject id, and the
//! pooled predictions are sorted by sample id before scoring. Results are
//! therefore identical regardless of execution order or thread count.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::data::{Dataset, Label};
use crate::error::EvalError;
use crate::ffnn::{self, predict_proba, TrainConfig, TrainExample, Variant, POSITIVE_CLASS};
use crate::metrics::{compute_metrics, MetricsReport, Prediction};
use crate::sampling;

/// One LOSO fold: the held-out subject's samples against everything else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSpec {
    pub held_out_subject: String,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
}

/// One fold per distinct subject, in sorted subject-id order.
pub fn loso_folds(dataset: &Dataset) -> Result<Vec<FoldSpec>, EvalError> {
    let mut subjects: BTreeSet<&str> = BTreeSet::new();
    for sample in dataset.samples() {
        subjects.insert(&sample.subject_id);
    }
    if subjects.len() < 2 {
        return Err(EvalError::TooFewSubjects(subjects.len()));
    }
    Ok(subjects
        .into_iter()
        .map(|subject| {
            let (test_ids, train_ids) = dataset
                .samples()
                .iter()
                .map(|s| (s.sample_id.clone(), s.subject_id == subject))
                .partition::<Vec<(String, bool)>, _>(|(_, held_out)| *held_out);
            FoldSpec {
                held_out_subject: subject.to_string(),
                train_ids: train_ids.into_iter().map(|(id, _)| id).collect(),
                test_ids: test_ids.into_iter().map(|(id, _)| id).collect(),
            }
        })
        .collect())
}

/// Seeded upsampling over (id, label) pairs; see [`sampling::upsample_minority`].
pub fn upsample_minority(
    train: &[(String, Label)],
    seed: u64,
) -> Result<Vec<(String, Label)>, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sampling::upsample_minority(train, &mut rng)
}

/// Stable per-fold seed, independent of platform and execution order.
pub fn fold_seed(global_seed: u64, subject_id: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(global_seed.to_le_bytes());
    hasher.update(subject_id.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// How to schedule the fold loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for ExecMode {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        ExecMode::Parallel
    }
    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        ExecMode::Sequential
    }
}

/// Pooled predictions plus the metrics computed over them.
#[derive(Debug, Clone)]
pub struct LosoOutcome {
    pub predictions: Vec<Prediction>,
    pub metrics: MetricsReport,
    pub folds_skipped: usize,
}

struct FoldOutput {
    predictions: Vec<Prediction>,
    skipped: bool,
}

fn run_fold(
    fold: &FoldSpec,
    dataset: &Dataset,
    embeddings: &BTreeMap<String, Vec<f64>>,
    cfg: &TrainConfig,
    variant: Variant,
) -> Result<FoldOutput, EvalError> {
    let mut train_data: Vec<TrainExample> = Vec::with_capacity(fold.train_ids.len());
    let mut train_subjects: Vec<String> = Vec::with_capacity(fold.train_ids.len());
    for id in &fold.train_ids {
        let sample = dataset.get(id).expect("fold ids come from the dataset");
        let values = embeddings
            .get(id)
            .ok_or_else(|| EvalError::MissingEmbedding {
                sample_id: id.clone(),
            })?;
        train_data.push((values.clone(), sample.label));
        train_subjects.push(sample.subject_id.clone());
    }
    let n_positive = train_data.iter().filter(|(_, l)| l.is_positive()).count();
    if n_positive == 0 || n_positive == train_data.len() {
        log::warn!(
            "fold {}: single-class training set, skipping",
            fold.held_out_subject
        );
        return Ok(FoldOutput {
            predictions: Vec::new(),
            skipped: true,
        });
    }
    let fold_cfg = TrainConfig {
        seed: fold_seed(cfg.seed, &fold.held_out_subject),
        ..cfg.clone()
    };
    let subjects = fold_cfg
        .subject_level_val_split
        .then_some(train_subjects.as_slice());
    let report = ffnn::train(&train_data, variant, &fold_cfg, subjects)?;
    let mut predictions = Vec::with_capacity(fold.test_ids.len());
    for id in &fold.test_ids {
        let sample = dataset.get(id).expect("fold ids come from the dataset");
        let values = embeddings
            .get(id)
            .ok_or_else(|| EvalError::MissingEmbedding {
                sample_id: id.clone(),
            })?;
        let proba = predict_proba(&report.params, values)?;
        let p_abnormal = proba[POSITIVE_CLASS];
        predictions.push(Prediction {
            sample_id: id.clone(),
            true_label: sample.label,
            p_abnormal,
            predicted: ffnn::label_from_proba(p_abnormal, 0.5),
        });
    }
    Ok(FoldOutput {
        predictions,
        skipped: false,
    })
}

/// Run the full LOSO protocol and score the pooled predictions.
pub fn run_loso(
    dataset: &Dataset,
    embeddings: &BTreeMap<String, Vec<f64>>,
    cfg: &TrainConfig,
    variant: Variant,
) -> Result<LosoOutcome, EvalError> {
    run_loso_mode(dataset, embeddings, cfg, variant, ExecMode::default())
}

/// As [`run_loso`], with explicit fold scheduling (used by the benchmarks).
pub fn run_loso_mode(
    dataset: &Dataset,
    embeddings: &BTreeMap<String, Vec<f64>>,
    cfg: &TrainConfig,
    variant: Variant,
    mode: ExecMode,
) -> Result<LosoOutcome, EvalError> {
    for sample in dataset.samples() {
        if !embeddings.contains_key(&sample.sample_id) {
            return Err(EvalError::MissingEmbedding {
                sample_id: sample.sample_id.clone(),
            });
        }
    }
    let folds = loso_folds(dataset)?;
    let outputs: Vec<Result<FoldOutput, EvalError>> = match mode {
        ExecMode::Sequential => folds
            .iter()
            .map(|fold| run_fold(fold, dataset, embeddings, cfg, variant))
            .collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => folds
            .par_iter()
            .map(|fold| run_fold(fold, dataset, embeddings, cfg, variant))
            .collect(),
    };
    let mut predictions = Vec::new();
    let mut folds_skipped = 0;
    for output in outputs {
        let output = output?;
        if output.skipped {
            folds_skipped += 1;
        }
        predictions.extend(output.predictions);
    }
    // Order-normalize so parallel and sequential runs score identically.
    predictions.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    let metrics = compute_metrics(&predictions)?;
    Ok(LosoOutcome {
        predictions,
        metrics,
        folds_skipped,
    })
}

/// Metrics for one hidden-layer size of the sensitivity sweep.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub hidden: usize,
    pub metrics: MetricsReport,
    pub folds_skipped: usize,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub results: Vec<SweepResult>,
    /// (h, error message) for configurations that failed.
    pub failures: Vec<(usize, String)>,
}

/// Hidden-unit sizes evaluated when none are given.
pub const DEFAULT_SWEEP_HIDDEN: [usize; 7] = [4, 8, 16, 32, 64, 128, 256];

/// LOSO with the alternative head for each hidden size, in input order.
/// A failing size is recorded and the sweep continues.
pub fn sensitivity_sweep(
    dataset: &Dataset,
    embeddings: &BTreeMap<String, Vec<f64>>,
    cfg: &TrainConfig,
    h_values: &[usize],
) -> Result<SweepOutcome, EvalError> {
    if h_values.is_empty() {
        return Err(EvalError::EmptyHiddenList);
    }
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for &hidden in h_values {
        match run_loso(dataset, embeddings, cfg, Variant::Alternative { hidden }) {
            Ok(outcome) => results.push(SweepResult {
                hidden,
                metrics: outcome.metrics,
                folds_skipped: outcome.folds_skipped,
            }),
            Err(e) => {
                log::warn!("sweep h={hidden} failed: {e}");
                failures.push((hidden, e.to_string()));
            }
        }
    }
    Ok(SweepOutcome { results, failures })
}

/// Zero-shot metrics from verdict labels joined to the dataset.
///
/// Scores are degenerate 0/1 values, so the AUC carries a caveat flag.
#[derive(Debug, Clone)]
pub struct ZeroShotOutcome {
    pub metrics: MetricsReport,
    pub degenerate_scores: bool,
}

/// `verdicts` pairs each sample id with the verdict-derived label.
pub fn zero_shot_eval(
    verdicts: &[(String, Label)],
    dataset: &Dataset,
) -> Result<ZeroShotOutcome, EvalError> {
    let mut predictions = Vec::with_capacity(verdicts.len());
    for (sample_id, verdict_label) in verdicts {
        let sample = dataset
            .get(sample_id)
            .ok_or_else(|| EvalError::UnmatchedSampleId {
                sample_id: sample_id.clone(),
            })?;
        predictions.push(Prediction {
            sample_id: sample_id.clone(),
            true_label: sample.label,
            p_abnormal: if verdict_label.is_positive() { 1.0 } else { 0.0 },
            predicted: *verdict_label,
        });
    }
    predictions.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    let metrics = compute_metrics(&predictions)?;
    Ok(ZeroShotOutcome {
        metrics,
        degenerate_scores: true,
    })
}

/// Line-delimited predictions file.
pub fn save_predictions(preds: &[Prediction], path: &Path) -> Result<(), EvalError> {
    let mut file = File::create(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    for p in preds {
        writeln!(file, "{}", serde_json::to_string(p).expect("serialize")).map_err(|source| {
            EvalError::Io {
                path: path.display().to_string(),
                source,
            }
        })?;
    }
    Ok(())
}

pub fn load_predictions(path: &Path) -> Result<Vec<Prediction>, EvalError> {
    let file = File::open(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    BufReader::new(file)
        .lines()
        .filter_map(|line| match line {
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(serde_json::from_str(&l).map_err(|e| EvalError::Io {
                path: path.display().to_string(),
                source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
            })),
            Err(source) => Some(Err(EvalError::Io {
                path: path.display().to_string(),
                source,
            })),
        })
        .collect()
}
