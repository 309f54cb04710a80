//! Gaussian-kernel (Parzen window) classifier with a Beta-style class prior.
//!
//! Each class receives a pseudo-member of kernel weight `ε` everywhere:
//!
//! ```text
//! p̂(y | x) = (Σ_{i: y_i = y} k(x, x_i) + ε) / (Σ_i k(x, x_i) + C·ε)
//! k(x, x_i) = exp(−(x − x_i)² / 2σ²)
//! ```
//!
//! The kernel is left unnormalized because the normalization constant cancels
//! in the ratio. Masses reported by [`KernelStats`] are therefore "effective
//! neighbor counts": a training point sitting exactly on the query counts 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::synth::{ClassIndex, LabeledSample};

/// Exponents below this are clamped before `exp`.
pub const MIN_EXPONENT: f64 = -700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParzenError {
    #[error("bandwidth must be > 0, got {0}")]
    Bandwidth(f64),
    #[error("prior weight must be >= 0, got {0}")]
    PriorWeight(f64),
    #[error("class count must be >= 2, got {0}")]
    ClassCount(usize),
    #[error("training sample {index} has label {label} outside 0..{class_count}")]
    LabelOutOfRange { index: usize, label: usize, class_count: usize },
    #[error("no evaluation instances")]
    EmptyEvaluation,
    #[error("{weights} weights given for {instances} evaluation instances")]
    WeightLength { weights: usize, instances: usize },
    #[error("weights must be finite, nonnegative and not all zero")]
    InvalidWeights,
}

/// Anything that maps a feature value to a class.
pub trait Classifier {
    fn predict(&self, x: f64) -> ClassIndex;
}

impl<F: Fn(f64) -> ClassIndex> Classifier for F {
    fn predict(&self, x: f64) -> ClassIndex {
        self(x)
    }
}

/// Hyperparameters shared by every place that fits a classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub bandwidth: f64,
    pub prior_weight: f64,
    pub class_count: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self { bandwidth: 0.2, prior_weight: 0.01, class_count: 2 }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), ParzenError> {
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(ParzenError::Bandwidth(self.bandwidth));
        }
        if !(self.prior_weight >= 0.0 && self.prior_weight.is_finite()) {
            return Err(ParzenError::PriorWeight(self.prior_weight));
        }
        if self.class_count < 2 {
            return Err(ParzenError::ClassCount(self.class_count));
        }
        Ok(())
    }

    pub fn fit(&self, training: Vec<LabeledSample>) -> Result<ParzenModel, ParzenError> {
        ParzenModel::fit(training, self.bandwidth, self.prior_weight, self.class_count)
    }
}

/// Unnormalized Gaussian kernel, `exp(−Δ²/2σ²)` with the exponent clamped.
pub fn gaussian_kernel(delta: f64, bandwidth: f64) -> f64 {
    let exponent = -(delta * delta) / (2.0 * bandwidth * bandwidth);
    exponent.max(MIN_EXPONENT).exp()
}

/// Per-class kernel mass at a query point.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelStats {
    pub per_class_mass: Vec<f64>,
    pub total_mass: f64,
}

impl KernelStats {
    pub fn collect(training: &[LabeledSample], x: f64, bandwidth: f64, class_count: usize) -> Self {
        let mut per_class_mass = vec![0.0; class_count];
        for s in training {
            per_class_mass[s.y] += gaussian_kernel(x - s.x, bandwidth);
        }
        let total_mass = per_class_mass.iter().sum();
        Self { per_class_mass, total_mass }
    }
}

/// Posterior vector plus a flag for the `ε = 0`, zero-mass case.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub probs: Vec<f64>,
    /// No kernel evidence and no prior: the uniform vector was substituted.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParzenModel {
    training: Vec<LabeledSample>,
    bandwidth: f64,
    prior_weight: f64,
    class_count: usize,
}

impl ParzenModel {
    pub fn fit(
        training: Vec<LabeledSample>,
        bandwidth: f64,
        prior_weight: f64,
        class_count: usize,
    ) -> Result<Self, ParzenError> {
        ClassifierConfig { bandwidth, prior_weight, class_count }.validate()?;
        if let Some((index, s)) = training.iter().enumerate().find(|(_, s)| s.y >= class_count) {
            return Err(ParzenError::LabelOutOfRange { index, label: s.y, class_count });
        }
        Ok(Self { training, bandwidth, prior_weight, class_count })
    }

    pub fn training(&self) -> &[LabeledSample] {
        &self.training
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn prior_weight(&self) -> f64 {
        self.prior_weight
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn kernel_stats(&self, x: f64) -> KernelStats {
        KernelStats::collect(&self.training, x, self.bandwidth, self.class_count)
    }

    pub fn posterior_detailed(&self, x: f64) -> Posterior {
        let stats = self.kernel_stats(x);
        let denom = stats.total_mass + self.class_count as f64 * self.prior_weight;
        if denom > 0.0 {
            let probs = stats.per_class_mass.iter().map(|m| (m + self.prior_weight) / denom).collect();
            Posterior { probs, degenerate: false }
        } else {
            let uniform = 1.0 / self.class_count as f64;
            Posterior { probs: vec![uniform; self.class_count], degenerate: true }
        }
    }

    pub fn posterior(&self, x: f64) -> Vec<f64> {
        self.posterior_detailed(x).probs
    }

    /// Fraction (or weighted fraction) of `eval` predicted correctly.
    pub fn accuracy_on(&self, eval: &[LabeledSample], weights: Option<&[f64]>) -> Result<f64, ParzenError> {
        accuracy_of(self, eval, weights)
    }
}

/// Index of the largest entry; ties go to the smallest index.
pub fn argmax(values: &[f64]) -> ClassIndex {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

impl Classifier for ParzenModel {
    fn predict(&self, x: f64) -> ClassIndex {
        argmax(&self.posterior(x))
    }
}

/// Weighted mean of 0/1 correctness indicators.
///
/// Weights are rescaled by their maximum before summing, so a constant weight
/// vector reproduces the unweighted value bit for bit.
pub fn weighted_accuracy(correct: &[bool], weights: Option<&[f64]>) -> Result<f64, ParzenError> {
    if correct.is_empty() {
        return Err(ParzenError::EmptyEvaluation);
    }
    let Some(weights) = weights else {
        let hits = correct.iter().filter(|c| **c).count();
        return Ok(hits as f64 / correct.len() as f64);
    };
    if weights.len() != correct.len() {
        return Err(ParzenError::WeightLength { weights: weights.len(), instances: correct.len() });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(ParzenError::InvalidWeights);
    }
    let scale = weights.iter().copied().fold(0.0, f64::max);
    if scale <= 0.0 {
        return Err(ParzenError::InvalidWeights);
    }
    let (mut hit, mut total) = (0.0, 0.0);
    for (c, w) in correct.iter().zip(weights) {
        let w = w / scale;
        total += w;
        if *c {
            hit += w;
        }
    }
    Ok(hit / total)
}

pub fn accuracy_of<C: Classifier + ?Sized>(
    classifier: &C,
    eval: &[LabeledSample],
    weights: Option<&[f64]>,
) -> Result<f64, ParzenError> {
    let correct: Vec<bool> = eval.iter().map(|s| classifier.predict(s.x) == s.y).collect();
    weighted_accuracy(&correct, weights)
}
