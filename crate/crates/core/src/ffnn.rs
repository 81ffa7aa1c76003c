//! Linear and one-hidden-layer classification heads over 384-d embeddings.
//!
//! The default head is `Wx + b`; the alternative adds a ReLU hidden layer
//! with optional inverted dropout: `W2 * dropout(ReLU(W1 x + b1)) + b2`.
//! Logits go through a numerically stable softmax; training uses mean
//! cross-entropy plus a coupled L2 penalty on weights (biases excluded),
//! optimized with Adam, selecting the epoch with the best validation F1.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::FfnnError;
use crate::sampling::upsample_minority;

pub const N_CLASSES: usize = 2;
/// Index of the positive (abnormal) class in logits/probabilities.
pub const POSITIVE_CLASS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Variant {
    Default,
    Alternative { hidden: usize },
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Default => write!(f, "default"),
            Variant::Alternative { hidden } => write!(f, "alternative(h={hidden})"),
        }
    }
}

/// One dense layer: row-major `rows x cols` weight matrix plus bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

impl Layer {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            w: vec![0.0; rows * cols],
            b: vec![0.0; rows],
            rows,
            cols,
        }
    }

    fn init(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (cols as f64).sqrt();
        let mut layer = Self::zeros(rows, cols);
        for w in layer.w.iter_mut() {
            *w = rng.gen_range(-bound..bound);
        }
        for b in layer.b.iter_mut() {
            *b = rng.gen_range(-bound..bound);
        }
        layer
    }

    /// y = Wx + b
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for r in 0..self.rows {
            let row = &self.w[r * self.cols..(r + 1) * self.cols];
            let mut acc = self.b[r];
            for (wi, xi) in row.iter().zip(x.iter()) {
                acc += wi * xi;
            }
            out[r] = acc;
        }
    }
}

/// Parameters of either head variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfnnParams {
    pub variant: Variant,
    pub layers: Vec<Layer>,
}

impl FfnnParams {
    /// Freshly initialized parameters, uniform in +-1/sqrt(fan_in).
    pub fn init(variant: Variant, input_dim: usize, rng: &mut impl Rng) -> Result<Self, FfnnError> {
        let layers = match variant {
            Variant::Default => vec![Layer::init(N_CLASSES, input_dim, rng)],
            Variant::Alternative { hidden } => {
                if hidden == 0 {
                    return Err(FfnnError::InvalidConfig("hidden units must be >= 1".into()));
                }
                vec![
                    Layer::init(hidden, input_dim, rng),
                    Layer::init(N_CLASSES, hidden, rng),
                ]
            }
        };
        Ok(Self { variant, layers })
    }

    pub fn zeros(variant: Variant, input_dim: usize) -> Result<Self, FfnnError> {
        let layers = match variant {
            Variant::Default => vec![Layer::zeros(N_CLASSES, input_dim)],
            Variant::Alternative { hidden } => {
                if hidden == 0 {
                    return Err(FfnnError::InvalidConfig("hidden units must be >= 1".into()));
                }
                vec![
                    Layer::zeros(hidden, input_dim),
                    Layer::zeros(N_CLASSES, hidden),
                ]
            }
        };
        Ok(Self { variant, layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    fn grads_like(&self) -> Gradients {
        Gradients {
            layers: self
                .layers
                .iter()
                .map(|l| Layer::zeros(l.rows, l.cols))
                .collect(),
        }
    }

    fn assert_finite(&self, stage: &'static str) -> Result<(), FfnnError> {
        for layer in &self.layers {
            if layer.w.iter().chain(layer.b.iter()).any(|v| !v.is_finite()) {
                return Err(FfnnError::NonFinite { stage });
            }
        }
        Ok(())
    }
}

/// Per-parameter gradients, shaped like [`FfnnParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

/// Fixed dropout decision for the hidden activations (inverted scaling).
#[derive(Debug, Clone)]
pub struct DropoutMask {
    pub keep: Vec<bool>,
    pub p: f64,
}

impl DropoutMask {
    pub fn sample(hidden: usize, p: f64, rng: &mut impl Rng) -> Self {
        let keep = (0..hidden).map(|_| rng.gen::<f64>() >= p).collect();
        Self { keep, p }
    }

    fn scale(&self) -> f64 {
        1.0 / (1.0 - self.p)
    }
}

/// Raw logits of the head.
pub fn forward(
    params: &FfnnParams,
    x: &[f64],
    dropout: Option<&DropoutMask>,
) -> Result<[f64; N_CLASSES], FfnnError> {
    if x.len() != params.input_dim() {
        return Err(FfnnError::ShapeMismatch(format!(
            "input has {} components, expected {}",
            x.len(),
            params.input_dim()
        )));
    }
    match params.variant {
        Variant::Default => {
            if dropout.is_some() {
                return Err(FfnnError::ShapeMismatch(
                    "dropout is only valid for the alternative variant".into(),
                ));
            }
            let mut logits = [0.0; N_CLASSES];
            params.layers[0].apply(x, &mut logits);
            Ok(logits)
        }
        Variant::Alternative { hidden } => {
            let mut activation = vec![0.0; hidden];
            params.layers[0].apply(x, &mut activation);
            for a in activation.iter_mut() {
                *a = a.max(0.0);
            }
            if let Some(mask) = dropout {
                if mask.keep.len() != hidden {
                    return Err(FfnnError::ShapeMismatch(format!(
                        "dropout mask has {} entries, expected {hidden}",
                        mask.keep.len()
                    )));
                }
                let scale = mask.scale();
                for (a, &keep) in activation.iter_mut().zip(mask.keep.iter()) {
                    *a = if keep { *a * scale } else { 0.0 };
                }
            }
            let mut logits = [0.0; N_CLASSES];
            params.layers[1].apply(&activation, &mut logits);
            Ok(logits)
        }
    }
}

/// Max-subtracted softmax over a pair of logits.
pub fn softmax(logits: [f64; N_CLASSES]) -> [f64; N_CLASSES] {
    let max = logits[0].max(logits[1]);
    let e0 = (logits[0] - max).exp();
    let e1 = (logits[1] - max).exp();
    let sum = e0 + e1;
    [e0 / sum, e1 / sum]
}

/// Class probabilities (inference mode, no dropout).
pub fn predict_proba(params: &FfnnParams, x: &[f64]) -> Result<[f64; N_CLASSES], FfnnError> {
    Ok(softmax(forward(params, x, None)?))
}

/// Strict decision rule: positive iff p_abnormal > threshold.
pub fn classify(params: &FfnnParams, x: &[f64], threshold: f64) -> Result<Label, FfnnError> {
    let proba = predict_proba(params, x)?;
    Ok(label_from_proba(proba[POSITIVE_CLASS], threshold))
}

pub fn label_from_proba(p_abnormal: f64, threshold: f64) -> Label {
    if p_abnormal > threshold {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// One training example: embedding values plus supervisory label.
pub type TrainExample = (Vec<f64>, Label);

/// Mean cross-entropy + l2_factor * ||W||^2 and its gradients.
///
/// `dropout_masks`, when given, must hold one mask per batch entry and is
/// only valid for the alternative variant.
pub fn loss_and_grads(
    params: &FfnnParams,
    batch: &[(&[f64], Label)],
    l2_factor: f64,
    dropout_masks: Option<&[DropoutMask]>,
) -> Result<(f64, Gradients), FfnnError> {
    if batch.is_empty() {
        return Err(FfnnError::DegenerateData("empty batch".into()));
    }
    if let Some(masks) = dropout_masks {
        if masks.len() != batch.len() {
            return Err(FfnnError::ShapeMismatch(
                "one dropout mask per batch entry required".into(),
            ));
        }
    }
    let mut grads = params.grads_like();
    let mut loss = 0.0;
    let inv_batch = 1.0 / batch.len() as f64;
    for (i, (x, label)) in batch.iter().enumerate() {
        let mask = dropout_masks.map(|m| &m[i]);
        let target = if label.is_positive() { POSITIVE_CLASS } else { 0 };
        match params.variant {
            Variant::Default => {
                let logits = forward(params, x, None)?;
                let proba = softmax(logits);
                loss -= proba[target].max(f64::MIN_POSITIVE).ln() * inv_batch;
                let layer = &params.layers[0];
                let grad_layer = &mut grads.layers[0];
                for r in 0..N_CLASSES {
                    let dz = (proba[r] - if r == target { 1.0 } else { 0.0 }) * inv_batch;
                    grad_layer.b[r] += dz;
                    let row = &mut grad_layer.w[r * layer.cols..(r + 1) * layer.cols];
                    for (g, xi) in row.iter_mut().zip(x.iter()) {
                        *g += dz * xi;
                    }
                }
            }
            Variant::Alternative { hidden } => {
                // Recompute the intermediate activations for backprop.
                let mut pre = vec![0.0; hidden];
                params.layers[0].apply(x, &mut pre);
                let mut act: Vec<f64> = pre.iter().map(|a| a.max(0.0)).collect();
                let mut drop_scale = vec![1.0; hidden];
                if let Some(mask) = mask {
                    if mask.keep.len() != hidden {
                        return Err(FfnnError::ShapeMismatch(
                            "dropout mask size mismatch".into(),
                        ));
                    }
                    let scale = mask.scale();
                    for h in 0..hidden {
                        drop_scale[h] = if mask.keep[h] { scale } else { 0.0 };
                        act[h] *= drop_scale[h];
                    }
                }
                let mut logits = [0.0; N_CLASSES];
                params.layers[1].apply(&act, &mut logits);
                let proba = softmax(logits);
                loss -= proba[target].max(f64::MIN_POSITIVE).ln() * inv_batch;

                let out_layer = &params.layers[1];
                let mut d_act = vec![0.0; hidden];
                {
                    let grad_out = &mut grads.layers[1];
                    for r in 0..N_CLASSES {
                        let dz = (proba[r] - if r == target { 1.0 } else { 0.0 }) * inv_batch;
                        grad_out.b[r] += dz;
                        let row = &mut grad_out.w[r * hidden..(r + 1) * hidden];
                        let w_row = &out_layer.w[r * hidden..(r + 1) * hidden];
                        for h in 0..hidden {
                            row[h] += dz * act[h];
                            d_act[h] += dz * w_row[h];
                        }
                    }
                }
                let grad_in = &mut grads.layers[0];
                let cols = params.layers[0].cols;
                for h in 0..hidden {
                    let relu_grad = if pre[h] > 0.0 { 1.0 } else { 0.0 };
                    let da = d_act[h] * drop_scale[h] * relu_grad;
                    if da == 0.0 {
                        continue;
                    }
                    grad_in.b[h] += da;
                    let row = &mut grad_in.w[h * cols..(h + 1) * cols];
                    for (g, xi) in row.iter_mut().zip(x.iter()) {
                        *g += da * xi;
                    }
                }
            }
        }
    }
    if l2_factor != 0.0 {
        for (layer, grad) in params.layers.iter().zip(grads.layers.iter_mut()) {
            for (w, g) in layer.w.iter().zip(grad.w.iter_mut()) {
                loss += l2_factor * w * w;
                *g += 2.0 * l2_factor * w;
            }
        }
    }
    if !loss.is_finite() {
        return Err(FfnnError::NonFinite { stage: "loss" });
    }
    Ok((loss, grads))
}

/// Adam hyperparameters and the training schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2_factor: f64,
    pub val_fraction: f64,
    /// Dropout probability for the alternative variant's hidden layer.
    pub dropout_p: f64,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Split off the validation subset first, then upsample only the
    /// remaining training portion.
    pub upsample_after_split: bool,
    /// Group the validation split by subject instead of by sample.
    pub subject_level_val_split: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            epochs: 15,
            batch_size: 2,
            l2_factor: 1e-4,
            val_fraction: 0.10,
            dropout_p: 0.5,
            seed: 0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            upsample_after_split: true,
            subject_level_val_split: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), FfnnError> {
        if self.learning_rate <= 0.0 {
            return Err(FfnnError::InvalidConfig("learning_rate must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(FfnnError::InvalidConfig(
                "val_fraction must be in [0, 1)".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(FfnnError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(FfnnError::InvalidConfig("dropout_p must be in [0, 1)".into()));
        }
        if self.epochs == 0 {
            return Err(FfnnError::InvalidConfig("epochs must be >= 1".into()));
        }
        Ok(())
    }
}

/// First/second moment accumulators plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: Gradients,
    pub v: Gradients,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &FfnnParams) -> Self {
        Self {
            m: params.grads_like(),
            v: params.grads_like(),
            t: 0,
        }
    }
}

/// Standard Adam update with bias-corrected moments.
pub fn adam_step(
    params: &mut FfnnParams,
    grads: &Gradients,
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<(), FfnnError> {
    state.t += 1;
    let bc1 = 1.0 - cfg.adam_beta1.powi(state.t as i32);
    let bc2 = 1.0 - cfg.adam_beta2.powi(state.t as i32);
    for i in 0..params.layers.len() {
        let layer = &mut params.layers[i];
        let grad = &grads.layers[i];
        let m = &mut state.m.layers[i];
        let v = &mut state.v.layers[i];
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = cfg.adam_beta1 * *m + (1.0 - cfg.adam_beta1) * g;
            *v = cfg.adam_beta2 * *v + (1.0 - cfg.adam_beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_epsilon);
        };
        for j in 0..layer.w.len() {
            update(&mut layer.w[j], grad.w[j], &mut m.w[j], &mut v.w[j]);
        }
        for j in 0..layer.b.len() {
            update(&mut layer.b[j], grad.b[j], &mut m.b[j], &mut v.b[j]);
        }
    }
    params.assert_finite("adam_step")
}

/// Per-epoch history plus the best-epoch parameter snapshot.
#[derive(Debug, Clone)]
pub struct TrainReport {
    /// 1-based epoch whose snapshot is returned (earliest on ties).
    pub best_epoch: usize,
    pub train_loss: Vec<f64>,
    pub val_f1: Vec<f64>,
    pub params: FfnnParams,
    pub val_size: usize,
}

fn f1_positive(pairs: &[(Label, Label)]) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for &(truth, predicted) in pairs {
        match (truth.is_positive(), predicted.is_positive()) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    if 2 * tp + fp + fn_ == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

/// Train a head on embedding/label pairs.
///
/// A seeded `val_fraction` split is reserved for validation; the remaining
/// training portion is optionally upsampled to class balance, then trained
/// for `epochs` passes of shuffled mini-batches. The snapshot with the
/// highest validation F1 wins (earliest epoch on ties). `subjects`, when
/// given, enables subject-level validation splitting.
pub fn train(
    data: &[TrainExample],
    variant: Variant,
    cfg: &TrainConfig,
    subjects: Option<&[String]>,
) -> Result<TrainReport, FfnnError> {
    cfg.validate()?;
    if data.len() < 2 {
        return Err(FfnnError::DegenerateData(format!(
            "need at least 2 samples, got {}",
            data.len()
        )));
    }
    let n_positive = data.iter().filter(|(_, l)| l.is_positive()).count();
    if n_positive == 0 || n_positive == data.len() {
        return Err(FfnnError::DegenerateData(
            "training set contains a single class".into(),
        ));
    }
    if let Some(subjects) = subjects {
        if subjects.len() != data.len() {
            return Err(FfnnError::ShapeMismatch(
                "one subject id per training example required".into(),
            ));
        }
    }
    let input_dim = data[0].0.len();
    if data.iter().any(|(x, _)| x.len() != input_dim) {
        return Err(FfnnError::ShapeMismatch(
            "inconsistent embedding dimensions in training data".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Validation split first, then upsampling of the training portion only.
    let mut indices: Vec<usize> = (0..data.len()).collect();
    let n_val = (cfg.val_fraction * data.len() as f64).floor() as usize;
    let (val_idx, train_idx): (Vec<usize>, Vec<usize>) =
        if cfg.subject_level_val_split && subjects.is_some() {
            let subjects = subjects.unwrap();
            let mut unique: Vec<&String> = {
                let mut set: Vec<&String> = subjects.iter().collect();
                set.sort();
                set.dedup();
                set
            };
            unique.shuffle(&mut rng);
            let mut val_subjects: std::collections::HashSet<&String> =
                std::collections::HashSet::new();
            let mut val_count = 0usize;
            for s in unique {
                if val_count >= n_val {
                    break;
                }
                val_subjects.insert(s);
                val_count += subjects.iter().filter(|x| *x == s).count();
            }
            indices
                .iter()
                .partition(|&&i| val_subjects.contains(&subjects[i]))
        } else {
            indices.shuffle(&mut rng);
            let val: Vec<usize> = indices[..n_val].to_vec();
            let train: Vec<usize> = indices[n_val..].to_vec();
            (val, train)
        };
    let has_validation = !val_idx.is_empty();
    if !has_validation {
        log::warn!(
            "validation split is empty at val_fraction={}; falling back to last-epoch selection",
            cfg.val_fraction
        );
    }

    let mut train_pool: Vec<(usize, Label)> =
        train_idx.iter().map(|&i| (i, data[i].1)).collect();
    if cfg.upsample_after_split {
        let classes = train_pool.iter().filter(|(_, l)| l.is_positive()).count();
        if classes == 0 || classes == train_pool.len() {
            log::warn!("training portion is single-class after the validation split; skipping upsampling");
        } else {
            train_pool = upsample_minority(&train_pool, &mut rng).expect("both classes present");
        }
    }

    let mut params = FfnnParams::init(variant, input_dim, &mut rng)?;
    let mut state = AdamState::new(&params);

    let mut best: Option<(usize, f64, FfnnParams)> = None;
    let mut train_loss_history = Vec::with_capacity(cfg.epochs);
    let mut val_f1_history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        train_pool.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut n_batches = 0usize;
        for chunk in train_pool.chunks(cfg.batch_size) {
            let batch: Vec<(&[f64], Label)> = chunk
                .iter()
                .map(|&(i, label)| (data[i].0.as_slice(), label))
                .collect();
            let masks = match variant {
                Variant::Alternative { hidden } if cfg.dropout_p > 0.0 => Some(
                    (0..batch.len())
                        .map(|_| DropoutMask::sample(hidden, cfg.dropout_p, &mut rng))
                        .collect::<Vec<_>>(),
                ),
                _ => None,
            };
            let (loss, grads) = loss_and_grads(&params, &batch, cfg.l2_factor, masks.as_deref())?;
            adam_step(&mut params, &grads, &mut state, cfg)?;
            epoch_loss += loss;
            n_batches += 1;
        }
        train_loss_history.push(epoch_loss / n_batches.max(1) as f64);

        let val_f1 = if has_validation {
            let pairs: Vec<(Label, Label)> = val_idx
                .iter()
                .map(|&i| Ok((data[i].1, classify(&params, &data[i].0, 0.5)?)))
                .collect::<Result<_, FfnnError>>()?;
            f1_positive(&pairs)
        } else {
            f64::NAN
        };
        val_f1_history.push(val_f1);

        let better = if has_validation {
            best.as_ref().map_or(true, |(_, best_f1, _)| val_f1 > *best_f1)
        } else {
            true // no validation set: keep the last epoch
        };
        if better {
            best = Some((epoch, val_f1, params.clone()));
        }
    }

    let (best_epoch, _, best_params) = best.expect("at least one epoch");
    Ok(TrainReport {
        best_epoch,
        train_loss: train_loss_history,
        val_f1: val_f1_history,
        params: best_params,
        val_size: val_idx.len(),
    })
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    variant: Variant,
    input_dim: usize,
    output_dim: usize,
    seed: u64,
    config_digest: String,
    layers: Vec<Layer>,
}

/// Persist parameters with a header identifying shape and provenance.
pub fn save_model(
    params: &FfnnParams,
    path: &Path,
    seed: u64,
    config_digest: &str,
) -> Result<(), FfnnError> {
    let file = ModelFile {
        format_version: 1,
        variant: params.variant,
        input_dim: params.input_dim(),
        output_dim: N_CLASSES,
        seed,
        config_digest: config_digest.to_string(),
        layers: params.layers.clone(),
    };
    let mut out = File::create(path).map_err(|source| FfnnError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let json = serde_json::to_string(&file).expect("serialize model");
    out.write_all(json.as_bytes()).map_err(|source| FfnnError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<FfnnParams, FfnnError> {
    let file = File::open(path).map_err(|source| FfnnError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let model: ModelFile = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| FfnnError::ModelFile(e.to_string()))?;
    let params = FfnnParams {
        variant: model.variant,
        layers: model.layers,
    };
    let expected: Vec<(usize, usize)> = match model.variant {
        Variant::Default => vec![(N_CLASSES, model.input_dim)],
        Variant::Alternative { hidden } => {
            vec![(hidden, model.input_dim), (N_CLASSES, hidden)]
        }
    };
    if params.layers.len() != expected.len() {
        return Err(FfnnError::ModelFile("layer count mismatch".into()));
    }
    for (layer, (rows, cols)) in params.layers.iter().zip(expected) {
        if layer.rows != rows
            || layer.cols != cols
            || layer.w.len() != rows * cols
            || layer.b.len() != rows
        {
            return Err(FfnnError::ModelFile(format!(
                "layer shape mismatch: got {}x{}, expected {rows}x{cols}",
                layer.rows, layer.cols
            )));
        }
    }
    params.assert_finite("load_model")?;
    Ok(params)
}
