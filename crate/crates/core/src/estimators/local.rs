//! Probabilistic performance from local label statistics.
//!
//! Around an evaluation instance the labeled set yields an effective label
//! count `n` and a local posterior estimate `p̂`. The accuracy at that
//! instance is then modeled as
//! `Beta(1 + max(n·p̂, n·(1−p̂)), 1 + min(n·p̂, n·(1−p̂)))`, and the estimate
//! for the whole evaluation set is the equal-weight mixture of these.

use serde::{Deserialize, Serialize};

use super::{BetaComponent, BetaMixture, EstimatorError, PerformanceEstimate};
use crate::parzen::gaussian_kernel;
use crate::synth::{LabeledSample, UnlabeledSample};

/// How "nearby labels" are counted.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum LocalCounting {
    /// Soft count: unnormalized Gaussian kernel mass with the classifier bandwidth.
    #[default]
    KernelMass,
    /// Hard count of labels with `|x − x_i| <= radius`.
    Window { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalLabelStatistics {
    /// Effective number of nearby labels.
    pub n: f64,
    /// Local estimate of `p(class 1 | x)`; 0.5 when `n = 0`.
    pub p_hat: f64,
}

impl LocalLabelStatistics {
    pub fn accuracy_distribution(&self) -> BetaComponent {
        let pos = self.n * self.p_hat;
        let neg = self.n * (1.0 - self.p_hat);
        BetaComponent::new(1.0 + pos.max(neg), 1.0 + pos.min(neg))
    }
}

pub fn local_label_statistics(
    labeled: &[LabeledSample],
    x: f64,
    bandwidth: f64,
    counting: LocalCounting,
) -> LocalLabelStatistics {
    let weight = |s: &LabeledSample| match counting {
        LocalCounting::KernelMass => gaussian_kernel(x - s.x, bandwidth),
        LocalCounting::Window { radius } => {
            if (x - s.x).abs() <= radius {
                1.0
            } else {
                0.0
            }
        }
    };
    let (mut n, mut positive) = (0.0, 0.0);
    for s in labeled {
        let w = weight(s);
        n += w;
        if s.y == 1 {
            positive += w;
        }
    }
    let p_hat = if n > 0.0 { (positive / n).clamp(0.0, 1.0) } else { 0.5 };
    LocalLabelStatistics { n, p_hat }
}

/// Beta-mixture accuracy estimate over the evaluation instances (two classes).
pub fn probabilistic_performance(
    labeled: &[LabeledSample],
    eval: &[UnlabeledSample],
    bandwidth: f64,
    counting: LocalCounting,
) -> Result<PerformanceEstimate, EstimatorError> {
    if eval.is_empty() {
        return Err(EstimatorError::EmptyEvaluation);
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(EstimatorError::Bandwidth(bandwidth));
    }
    if let Some((index, s)) = labeled.iter().enumerate().find(|(_, s)| s.y > 1) {
        return Err(EstimatorError::NotBinary { index, label: s.y });
    }
    let components = eval
        .iter()
        .map(|e| local_label_statistics(labeled, e.x, bandwidth, counting).accuracy_distribution())
        .collect();
    Ok(PerformanceEstimate::BetaMixture(BetaMixture::new(components)))
}
