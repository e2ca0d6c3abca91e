//! Veracity classification over assembled inputs.
//!
//! The in-repo model is a linear classifier over hashed token counts:
//! tokens are hashed into a 2^18-dimensional space with a stable FNV-1a
//! hash, so the digit-mode and context-budget ablations change the feature
//! space end to end. Training is mini-batch gradient descent under
//! cross-entropy or focal loss with early stopping on validation macro-F1.
//! Prediction optionally adds prior-derived logit biases. An HTTP contract
//! delegates to an external NLI server for transformer-backed runs.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{VeracityLabel, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::eval;
use crate::http::{post_json, HttpPolicy};
use crate::rerank::{assembled_tokens, AssembledInput};
use crate::tokenize::{ContextBudget, DigitMode};

/// Hashed feature space dimension.
pub const FEATURE_DIM: usize = 1 << 18;

/// Probabilities below this are clamped before taking logs.
pub const PROB_EPSILON: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

/// Sparse feature vector: (index, value) pairs sorted by index, values are
/// token counts normalized by stream length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct FeatureVector {
    pub entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn dot(&self, weights: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(i, v)| weights[i as usize] * v)
            .sum()
    }
}

/// FNV-1a 64-bit, stable across platforms and runs.
pub fn stable_hash(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &byte in bytes {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Hashes assembled inputs into [`FeatureVector`]s for one (mode, budget)
/// configuration; inputs assembled under anything else are rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Featurizer {
    pub mode: DigitMode,
    pub budget: ContextBudget,
}

impl Featurizer {
    pub fn featurize(&self, input: &AssembledInput) -> Result<FeatureVector> {
        if input.mode != self.mode || input.budget != self.budget {
            return Err(Error::data(format!(
                "input '{}' assembled under mode {:?}/budget {} but the model expects {:?}/{}",
                input.claim_id,
                input.mode.grouping,
                input.budget.max_tokens,
                self.mode.grouping,
                self.budget.max_tokens
            )));
        }
        let stream = assembled_tokens(input);
        let total = stream.len();
        if total == 0 {
            return Ok(FeatureVector::default());
        }
        let mut counts: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
        for token in &stream.tokens {
            let index = (stable_hash(token.as_bytes()) % FEATURE_DIM as u64) as u32;
            *counts.entry(index).or_insert(0) += 1;
        }
        let mut entries: Vec<(u32, f64)> = counts
            .into_iter()
            .map(|(i, c)| (i, c as f64 / total as f64))
            .collect();
        entries.sort_by_key(|&(i, _)| i);
        Ok(FeatureVector { entries })
    }
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    CrossEntropy,
    Focal,
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "cross_entropy" | "ce" => Ok(LossKind::CrossEntropy),
            "focal" => Ok(LossKind::Focal),
            other => Err(Error::config(format!(
                "unknown loss '{other}' (expected cross_entropy or focal)"
            ))),
        }
    }
}

/// Focal loss hyperparameters. `gamma = 0` with unit alphas reduces the
/// loss exactly to cross-entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocalLossConfig {
    pub gamma: f64,
    /// Per-class weights in (True, False, Conflicting) order.
    pub alpha: [f64; NUM_CLASSES],
}

impl Default for FocalLossConfig {
    fn default() -> Self {
        FocalLossConfig {
            gamma: 2.0,
            alpha: [1.0; NUM_CLASSES],
        }
    }
}

impl FocalLossConfig {
    pub fn cross_entropy() -> Self {
        FocalLossConfig {
            gamma: 0.0,
            alpha: [1.0; NUM_CLASSES],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma.is_nan() || self.gamma < 0.0 {
            return Err(Error::config(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        if self.alpha.iter().any(|&a| a.is_nan() || a < 0.0) {
            return Err(Error::config(format!(
                "alpha weights must be >= 0, got {:?}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Inverse class frequency, normalized to mean 1. Classes absent from
    /// the dataset get weight 0 (they cannot contribute loss anyway).
    pub fn inverse_frequency_alpha(class_counts: &[u64; NUM_CLASSES]) -> [f64; NUM_CLASSES] {
        let mut raw = [0.0; NUM_CLASSES];
        for (r, &c) in raw.iter_mut().zip(class_counts) {
            if c > 0 {
                *r = 1.0 / c as f64;
            }
        }
        let mean = raw.iter().sum::<f64>() / NUM_CLASSES as f64;
        if mean == 0.0 {
            return [1.0; NUM_CLASSES];
        }
        raw.map(|r| r / mean)
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64; NUM_CLASSES]) -> [f64; NUM_CLASSES] {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps = logits.map(|z| (z - max).exp());
    let sum: f64 = exps.iter().sum();
    exps.map(|e| e / sum)
}

/// Focal loss `-alpha_gold * (1 - p_gold)^gamma * ln(p_gold)` over a
/// probability vector. A zero gold probability is clamped to
/// [`PROB_EPSILON`]; the caller can count clamps via [`loss_clamped`].
pub fn loss(probs: &[f64; NUM_CLASSES], gold: usize, cfg: &FocalLossConfig) -> f64 {
    loss_clamped(probs, gold, cfg).0
}

/// As [`loss`], also reporting whether the clamp fired.
pub fn loss_clamped(probs: &[f64; NUM_CLASSES], gold: usize, cfg: &FocalLossConfig) -> (f64, bool) {
    let p = probs[gold];
    let clamped = p < PROB_EPSILON;
    let p = p.max(PROB_EPSILON);
    // 0^0 = 1 keeps the gamma = 0 case equal to cross-entropy at p = 1.
    let modulator = (1.0 - p).powf(cfg.gamma);
    (-cfg.alpha[gold] * modulator * p.ln(), clamped)
}

/// Loss evaluated from logits through softmax. This is the exact function
/// the analytic gradient differentiates; the finite-difference oracle in
/// the tests perturbs it directly.
pub fn loss_from_logits(logits: &[f64; NUM_CLASSES], gold: usize, cfg: &FocalLossConfig) -> f64 {
    loss(&softmax(logits), gold, cfg)
}

/// Analytic d loss / d logits through softmax.
///
/// With `p = softmax(z)`, `t = gold`, `g = 1 - p_t`:
/// `d/dz_j = alpha_t * (gamma g^(gamma-1) p_t ln p_t - g^gamma) * (delta_tj - p_j)`.
/// At `gamma = 0` the bracket is exactly -1, recovering
/// `alpha_t * (softmax - onehot)`.
pub fn loss_gradient(
    logits: &[f64; NUM_CLASSES],
    gold: usize,
    cfg: &FocalLossConfig,
) -> [f64; NUM_CLASSES] {
    let p = softmax(logits);
    let pt = p[gold].max(PROB_EPSILON);
    let g = 1.0 - p[gold];
    let bracket = if cfg.gamma == 0.0 {
        -1.0
    } else if g <= 0.0 {
        // Perfectly classified: no gradient for gamma > 0.
        0.0
    } else {
        cfg.gamma * g.powf(cfg.gamma - 1.0) * pt * pt.ln() - g.powf(cfg.gamma)
    };
    let alpha = cfg.alpha[gold];
    std::array::from_fn(|j| {
        let delta = if j == gold { 1.0 } else { 0.0 };
        alpha * bracket * (delta - p[j])
    })
}

// ---------------------------------------------------------------------------
// Prior logit bias
// ---------------------------------------------------------------------------

/// Additive logit offsets from scaled log-odds of label priors:
/// `bias_c = scale * ln(p_c / (1 - p_c))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorBias {
    pub priors: [f64; NUM_CLASSES],
    pub scale: f64,
}

impl PriorBias {
    pub fn new(priors: [f64; NUM_CLASSES], scale: f64) -> Result<Self> {
        if priors
            .iter()
            .any(|&p| !p.is_finite() || p <= 0.0 || p >= 1.0)
        {
            return Err(Error::config(format!(
                "priors must lie strictly in (0, 1), got {priors:?}"
            )));
        }
        if scale.is_nan() || scale < 0.0 {
            return Err(Error::config(format!(
                "prior-bias scale must be >= 0, got {scale}"
            )));
        }
        Ok(PriorBias { priors, scale })
    }

    pub fn biases(&self) -> [f64; NUM_CLASSES] {
        self.priors.map(|p| self.scale * (p / (1.0 - p)).ln())
    }
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// Linear multiclass model: per-class weight rows plus intercepts.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    /// Row-major, `NUM_CLASSES * dim`.
    pub weights: Vec<f64>,
    pub intercepts: [f64; NUM_CLASSES],
    pub dim: usize,
    pub mode: DigitMode,
    pub budget: ContextBudget,
    pub seed: u64,
    pub loss: LossKind,
    pub focal: FocalLossConfig,
}

impl ClassifierModel {
    fn zeroed(dim: usize, cfg: &TrainConfig) -> Self {
        ClassifierModel {
            weights: vec![0.0; NUM_CLASSES * dim],
            intercepts: [0.0; NUM_CLASSES],
            dim,
            mode: cfg.mode,
            budget: cfg.budget,
            seed: cfg.seed,
            loss: cfg.loss,
            focal: FocalLossConfig::default(),
        }
    }

    pub fn featurizer(&self) -> Featurizer {
        Featurizer {
            mode: self.mode,
            budget: self.budget,
        }
    }

    pub fn logits(&self, features: &FeatureVector) -> [f64; NUM_CLASSES] {
        std::array::from_fn(|c| {
            features.dot(&self.weights[c * self.dim..(c + 1) * self.dim]) + self.intercepts[c]
        })
    }
}

/// Label plus class probabilities, with optional prior logit biasing.
/// The argmax tie-break is the fixed class order.
pub fn predict(
    model: &ClassifierModel,
    features: &FeatureVector,
    bias: Option<&PriorBias>,
) -> (VeracityLabel, [f64; NUM_CLASSES]) {
    let mut logits = model.logits(features);
    if let Some(bias) = bias {
        let offsets = bias.biases();
        for (z, o) in logits.iter_mut().zip(offsets) {
            *z += o;
        }
    }
    let mut best = 0;
    for c in 1..NUM_CLASSES {
        if logits[c] > logits[best] {
            best = c;
        }
    }
    (VeracityLabel::from_index(best).unwrap(), softmax(&logits))
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Early-stop after this many epochs without validation improvement.
    pub patience: usize,
    pub batch_size: usize,
    pub loss: LossKind,
    pub gamma: f64,
    /// Per-class focal weights; `None` derives inverse class frequency
    /// normalized to mean 1 from the training set.
    pub alpha: Option<[f64; NUM_CLASSES]>,
    pub seed: u64,
    pub mode: DigitMode,
    pub budget: ContextBudget,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            max_epochs: 200,
            patience: 2,
            batch_size: 32,
            loss: LossKind::CrossEntropy,
            gamma: 2.0,
            alpha: None,
            seed: 42,
            mode: DigitMode::none(),
            budget: ContextBudget::SHORT,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::config(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.patience == 0 {
            return Err(Error::config("patience must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch size must be >= 1"));
        }
        if self.max_epochs == 0 {
            return Err(Error::config("max epochs must be >= 1"));
        }
        Ok(())
    }
}

/// Everything a training run produced, including the per-epoch trace used
/// by the ablation harness.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ClassifierModel,
    /// Epochs actually run (>= 1).
    pub epochs_run: u32,
    pub best_validation_macro_f1: f64,
    /// Mean training-set loss measured after each epoch's updates.
    pub train_loss_per_epoch: Vec<f64>,
    /// Times the probability clamp fired while computing losses.
    pub clamp_warnings: u64,
}

/// SplitMix64: tiny, seedable, identical on every platform.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = (self.next_u64() % (i as u64 + 1)) as usize;
            slice.swap(i, j);
        }
    }
}

fn macro_f1_of(model: &ClassifierModel, data: &[(FeatureVector, VeracityLabel)]) -> Result<f64> {
    let golds: Vec<VeracityLabel> = data.iter().map(|(_, l)| *l).collect();
    let preds: Vec<VeracityLabel> = data
        .iter()
        .map(|(f, _)| predict(model, f, None).0)
        .collect();
    eval::macro_f1(&eval::confusion(&golds, &preds)?)
}

/// Mini-batch gradient descent with early stopping on validation macro-F1.
/// Returns the best-validation snapshot; fully deterministic given the
/// seed. With no validation set, the training set doubles as one.
pub fn train(
    train_set: &[(FeatureVector, VeracityLabel)],
    validation: Option<&[(FeatureVector, VeracityLabel)]>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::data("training set is empty"));
    }
    let mut class_counts = [0u64; NUM_CLASSES];
    for (_, label) in train_set {
        class_counts[label.index()] += 1;
    }
    if class_counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::data(
            "training set must contain at least two distinct classes",
        ));
    }

    let focal = match cfg.loss {
        LossKind::CrossEntropy => FocalLossConfig::cross_entropy(),
        LossKind::Focal => {
            let alpha = cfg
                .alpha
                .unwrap_or_else(|| FocalLossConfig::inverse_frequency_alpha(&class_counts));
            let focal = FocalLossConfig {
                gamma: cfg.gamma,
                alpha,
            };
            focal.validate()?;
            focal
        }
    };

    let mut model = ClassifierModel::zeroed(FEATURE_DIM, cfg);
    model.focal = focal;
    let val_set = validation.unwrap_or(train_set);

    let mut rng = SplitMix64(cfg.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut best_model = model.clone();
    let mut best_score = f64::NEG_INFINITY;
    let mut epochs_since_improvement = 0usize;
    let mut epochs_run = 0u32;
    let mut train_loss_per_epoch = Vec::new();
    let mut clamp_warnings = 0u64;

    for _epoch in 0..cfg.max_epochs {
        epochs_run += 1;
        rng.shuffle(&mut order);

        for batch in order.chunks(cfg.batch_size) {
            // Accumulate sparse mean gradients over the batch.
            let mut weight_grad: std::collections::HashMap<(usize, u32), f64> =
                std::collections::HashMap::new();
            let mut intercept_grad = [0.0; NUM_CLASSES];
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let (features, label) = &train_set[i];
                let logits = model.logits(features);
                let grad = loss_gradient(&logits, label.index(), &model.focal);
                for (c, &g) in grad.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    intercept_grad[c] += g * scale;
                    for &(idx, value) in &features.entries {
                        *weight_grad.entry((c, idx)).or_insert(0.0) += g * value * scale;
                    }
                }
            }
            // Deterministic update order.
            let mut updates: Vec<((usize, u32), f64)> = weight_grad.into_iter().collect();
            updates.sort_by_key(|&(key, _)| key);
            for ((c, idx), g) in updates {
                model.weights[c * model.dim + idx as usize] -= cfg.learning_rate * g;
            }
            for (b, g) in model.intercepts.iter_mut().zip(intercept_grad) {
                *b -= cfg.learning_rate * g;
            }
        }

        // End-of-epoch training loss with the updated model.
        let mut epoch_loss = 0.0;
        for (features, label) in train_set {
            let probs = softmax(&model.logits(features));
            let (l, clamped) = loss_clamped(&probs, label.index(), &model.focal);
            epoch_loss += l;
            if clamped {
                clamp_warnings += 1;
            }
        }
        train_loss_per_epoch.push(epoch_loss / train_set.len() as f64);

        let score = macro_f1_of(&model, val_set)?;
        if score > best_score {
            best_score = score;
            best_model = model.clone();
            epochs_since_improvement = 0;
        } else {
            epochs_since_improvement += 1;
            if epochs_since_improvement >= cfg.patience {
                break;
            }
        }
    }

    Ok(TrainOutcome {
        model: best_model,
        epochs_run,
        best_validation_macro_f1: best_score,
        train_loss_per_epoch,
        clamp_warnings,
    })
}

// ---------------------------------------------------------------------------
// NLI server delegation
// ---------------------------------------------------------------------------

/// Client for an external NLI classification server.
///
/// Wire contract: `POST /classify` with `{"text": ...}`, response
/// `{"probs": {"True": ..., "False": ..., "Conflicting": ...}}` whose
/// values sum to 1 within 1e-6.
pub struct NliServerClient {
    pub base_url: String,
    pub token: Option<String>,
    pub policy: HttpPolicy,
    /// Set in offline runs; any call is then an error, never a fallback.
    pub offline: bool,
}

#[derive(Serialize)]
struct NliRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct NliResponse {
    probs: NliProbs,
}

#[derive(Deserialize)]
struct NliProbs {
    #[serde(rename = "True")]
    true_: f64,
    #[serde(rename = "False")]
    false_: f64,
    #[serde(rename = "Conflicting")]
    conflicting: f64,
}

pub fn nli_server_predict(
    client: &NliServerClient,
    input: &AssembledInput,
) -> Result<(VeracityLabel, [f64; NUM_CLASSES])> {
    if client.offline {
        return Err(Error::config("server path disabled in offline mode"));
    }
    let url = format!("{}/classify", client.base_url.trim_end_matches('/'));
    let response: NliResponse = post_json(
        "nli-server",
        &url,
        client.token.as_deref(),
        &NliRequest { text: &input.text },
        &client.policy,
    )?;
    let probs = [
        response.probs.true_,
        response.probs.false_,
        response.probs.conflicting,
    ];
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::service(
            "nli-server",
            format!("probabilities sum to {sum}, expected 1 within 1e-6"),
        ));
    }
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::service(
            "nli-server",
            format!("probabilities out of range: {probs:?}"),
        ));
    }
    let mut best = 0;
    for c in 1..NUM_CLASSES {
        if probs[c] > probs[best] {
            best = c;
        }
    }
    Ok((VeracityLabel::from_index(best).unwrap(), probs))
}

// ---------------------------------------------------------------------------
// Model persistence: JSON header + raw little-endian weights
// ---------------------------------------------------------------------------

const MODEL_MAGIC: &[u8; 4] = b"QCMD";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    dim: usize,
    mode: DigitMode,
    budget: ContextBudget,
    seed: u64,
    loss: LossKind,
    focal: FocalLossConfig,
}

impl ClassifierModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let header = serde_json::to_vec(&ModelHeader {
            dim: self.dim,
            mode: self.mode,
            budget: self.budget,
            seed: self.seed,
            loss: self.loss,
            focal: self.focal,
        })
        .map_err(|e| Error::data(e.to_string()))?;
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        w.write_all(MODEL_MAGIC)?;
        w.write_all(&MODEL_VERSION.to_le_bytes())?;
        w.write_all(&(header.len() as u32).to_le_bytes())?;
        w.write_all(&header)?;
        for value in &self.weights {
            w.write_all(&value.to_le_bytes())?;
        }
        for value in &self.intercepts {
            w.write_all(&value.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| {
            Error::data(format!(
                "cannot open model file {} (run `train` first): {e}",
                path.display()
            ))
        })?;
        let mut r = std::io::BufReader::new(file);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MODEL_MAGIC {
            return Err(Error::data("not a model file (bad magic)"));
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let version = u32::from_le_bytes(u32buf);
        if version != MODEL_VERSION {
            return Err(Error::data(format!(
                "unsupported model version {version} (expected {MODEL_VERSION})"
            )));
        }
        r.read_exact(&mut u32buf)?;
        let header_len = u32::from_le_bytes(u32buf) as usize;
        let mut header_bytes = vec![0u8; header_len];
        r.read_exact(&mut header_bytes)?;
        let header: ModelHeader = serde_json::from_slice(&header_bytes)
            .map_err(|e| Error::data(format!("malformed model header: {e}")))?;

        let mut weights = vec![0.0f64; NUM_CLASSES * header.dim];
        let mut f64buf = [0u8; 8];
        for value in weights.iter_mut() {
            r.read_exact(&mut f64buf)?;
            *value = f64::from_le_bytes(f64buf);
        }
        let mut intercepts = [0.0f64; NUM_CLASSES];
        for value in intercepts.iter_mut() {
            r.read_exact(&mut f64buf)?;
            *value = f64::from_le_bytes(f64buf);
        }
        let model = ClassifierModel {
            weights,
            intercepts,
            dim: header.dim,
            mode: header.mode,
            budget: header.budget,
            seed: header.seed,
            loss: header.loss,
            focal: header.focal,
        };
        if model.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::data("model weights contain non-finite values"));
        }
        Ok(model)
    }
}
