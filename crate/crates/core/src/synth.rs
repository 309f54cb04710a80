//! Synthetic 1-D classification tasks with known ground truth.
//!
//! A [`TaskModel`] is the data-generating distribution: class priors and a
//! Gaussian mixture per class. A [`SamplingDistribution`] stands in for a
//! selection strategy. Labels always come from the true class posterior, so
//! a biased sampler changes *where* labels are acquired but never the
//! labeling rule itself.
//!
//! Class indices are 0-based: class `0` is the left class (mean −1.5 in the
//! default task) and class `1` the right one.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::quad::{self, QuadratureError};

/// Index of a class, in `0..class_count`.
pub type ClassIndex = usize;

const SUM_TOLERANCE: f64 = 1e-12;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Integration range used for all density quadrature.
pub const SUPPORT: (f64, f64) = (-10.0, 10.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("a task needs at least two classes, got {0}")]
    TooFewClasses(usize),
    #[error("class priors must be nonnegative and sum to 1, got {0:?}")]
    InvalidPriors(Vec<f64>),
    #[error("class {class}: {reason}")]
    InvalidComponents { class: usize, reason: String },
    #[error("{0} priors given for {1} classes")]
    ClassCountMismatch(usize, usize),
    #[error("invalid sampling distribution: {0}")]
    InvalidSampler(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Standard normal density at `z`.
pub fn std_normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64, mean: f64, std: f64) -> f64 {
    std_normal_pdf((x - mean) / std) / std
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: f64,
    pub std: f64,
}

impl GaussianComponent {
    pub fn new(weight: f64, mean: f64, std: f64) -> Self {
        Self { weight, mean, std }
    }

    fn pdf(&self, x: f64) -> f64 {
        self.weight * normal_pdf(x, self.mean, self.std)
    }
}

fn check_probabilities(p: &[f64]) -> bool {
    p.iter().all(|v| v.is_finite() && *v >= 0.0) && (p.iter().sum::<f64>() - 1.0).abs() <= SUM_TOLERANCE
}

fn draw_categorical<R: Rng + ?Sized>(probs: impl IntoIterator<Item = f64>, count: usize, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.into_iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the cumulative sum
    count - 1
}

/// Data-generating distribution: `p(x, y) = prior(y) · Σ_j w_yj · N(x; μ_yj, σ_yj)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskModel {
    class_priors: Vec<f64>,
    class_components: Vec<Vec<GaussianComponent>>,
}

impl TaskModel {
    pub fn new(class_priors: Vec<f64>, class_components: Vec<Vec<GaussianComponent>>) -> Result<Self, SynthError> {
        if class_priors.len() < 2 {
            return Err(SynthError::TooFewClasses(class_priors.len()));
        }
        if class_priors.len() != class_components.len() {
            return Err(SynthError::ClassCountMismatch(class_priors.len(), class_components.len()));
        }
        if !check_probabilities(&class_priors) {
            return Err(SynthError::InvalidPriors(class_priors));
        }
        for (class, comps) in class_components.iter().enumerate() {
            let fail = |reason: &str| SynthError::InvalidComponents { class, reason: reason.to_string() };
            if comps.is_empty() {
                return Err(fail("no mixture components"));
            }
            if comps.iter().any(|c| !(c.std > 0.0 && c.std.is_finite()) || !c.mean.is_finite()) {
                return Err(fail("every component needs a finite mean and std > 0"));
            }
            let weights: Vec<f64> = comps.iter().map(|c| c.weight).collect();
            if !check_probabilities(&weights) {
                return Err(fail("component weights must be nonnegative and sum to 1"));
            }
        }
        Ok(Self { class_priors, class_components })
    }

    /// Two equally likely classes, each a single Gaussian at `∓mean_offset`.
    pub fn symmetric_pair(mean_offset: f64, std: f64) -> Result<Self, SynthError> {
        Self::new(
            vec![0.5, 0.5],
            vec![
                vec![GaussianComponent::new(1.0, -mean_offset, std)],
                vec![GaussianComponent::new(1.0, mean_offset, std)],
            ],
        )
    }

    pub fn class_count(&self) -> usize {
        self.class_priors.len()
    }

    pub fn class_priors(&self) -> &[f64] {
        &self.class_priors
    }

    pub fn class_components(&self) -> &[Vec<GaussianComponent>] {
        &self.class_components
    }

    /// Feature dimension; always 1.
    pub fn dimension(&self) -> usize {
        1
    }

    pub fn class_conditional_pdf(&self, class: ClassIndex, x: f64) -> f64 {
        self.class_components[class].iter().map(|c| c.pdf(x)).sum()
    }

    /// `Σ_y prior(y) · p(x | y)`.
    pub fn marginal_pdf(&self, x: f64) -> f64 {
        (0..self.class_count())
            .map(|y| self.class_priors[y] * self.class_conditional_pdf(y, x))
            .sum()
    }

    /// True class posterior `p(y | x)`.
    ///
    /// Falls back to the prior vector when every class-conditional density
    /// underflows at `x`.
    pub fn bayes_posterior(&self, x: f64) -> Vec<f64> {
        let joint: Vec<f64> = (0..self.class_count())
            .map(|y| self.class_priors[y] * self.class_conditional_pdf(y, x))
            .collect();
        let total: f64 = joint.iter().sum();
        if total > 0.0 && total.is_finite() {
            joint.into_iter().map(|v| v / total).collect()
        } else {
            self.class_priors.clone()
        }
    }

    /// Draws a feature value from the data marginal.
    pub fn sample_x<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let class = draw_categorical(self.class_priors.iter().copied(), self.class_count(), rng);
        let comps = &self.class_components[class];
        let c = &comps[draw_categorical(comps.iter().map(|c| c.weight), comps.len(), rng)];
        let z: f64 = rng.sample(StandardNormal);
        c.mean + c.std * z
    }

    /// Oracle: draws a label from the true posterior at `x`.
    pub fn label<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> ClassIndex {
        draw_categorical(self.bayes_posterior(x), self.class_count(), rng)
    }

    /// Accuracy of the Bayes-optimal rule, `∫ max_y prior(y) p(x|y) dx`.
    pub fn bayes_accuracy(&self) -> Result<f64, SynthError> {
        let (lo, hi) = self.integration_range();
        let value = quad::integrate(
            |x| {
                (0..self.class_count())
                    .map(|y| self.class_priors[y] * self.class_conditional_pdf(y, x))
                    .fold(0.0, f64::max)
            },
            lo,
            hi,
            200,
            1e-11,
        )?;
        Ok(value)
    }

    /// `[-10, 10]`, widened when some component has mass outside it.
    pub fn integration_range(&self) -> (f64, f64) {
        self.class_components
            .iter()
            .flatten()
            .fold(SUPPORT, |(lo, hi), c| (lo.min(c.mean - 12.0 * c.std), hi.max(c.mean + 12.0 * c.std)))
    }
}

impl Default for TaskModel {
    /// Unit-variance Gaussians at −1.5 and +1.5 with equal priors.
    fn default() -> Self {
        Self::symmetric_pair(1.5, 1.0).expect("default task is valid")
    }
}

/// Acquisition distribution `q(x)` used in place of a selection strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SamplingDistribution {
    /// Unbiased: `q` is the task's data marginal.
    DataMarginal,
    /// Two Gaussians at `−distance` and `+distance`.
    SymmetricMixture {
        distance: f64,
        component_std: f64,
        component_priors: [f64; 2],
    },
}

impl SamplingDistribution {
    pub const DEFAULT_COMPONENT_STD: f64 = 0.25;

    pub fn symmetric_mixture(distance: f64) -> Self {
        Self::SymmetricMixture {
            distance,
            component_std: Self::DEFAULT_COMPONENT_STD,
            component_priors: [0.5, 0.5],
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        match self {
            Self::DataMarginal => Ok(()),
            Self::SymmetricMixture { distance, component_std, component_priors } => {
                if !distance.is_finite() {
                    return Err(SynthError::InvalidSampler(format!("distance must be finite, got {distance}")));
                }
                if !(*component_std > 0.0 && component_std.is_finite()) {
                    return Err(SynthError::InvalidSampler(format!("component std must be > 0, got {component_std}")));
                }
                if !check_probabilities(component_priors) {
                    return Err(SynthError::InvalidSampler(format!(
                        "component priors must sum to 1, got {component_priors:?}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// `q(x)`. The task model is only consulted for [`Self::DataMarginal`].
    pub fn density(&self, model: &TaskModel, x: f64) -> f64 {
        match self {
            Self::DataMarginal => model.marginal_pdf(x),
            Self::SymmetricMixture { distance, component_std, component_priors } => {
                component_priors[0] * normal_pdf(x, -distance, *component_std)
                    + component_priors[1] * normal_pdf(x, *distance, *component_std)
            }
        }
    }

    pub fn sample_x<R: Rng + ?Sized>(&self, model: &TaskModel, rng: &mut R) -> f64 {
        match self {
            Self::DataMarginal => model.sample_x(rng),
            Self::SymmetricMixture { distance, component_std, component_priors } => {
                let side = draw_categorical(component_priors.iter().copied(), 2, rng);
                let z: f64 = rng.sample(StandardNormal);
                let mean = if side == 0 { -distance } else { *distance };
                mean + component_std * z
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnlabeledSample {
    pub x: f64,
}

/// A labeled instance together with `q(x)` at acquisition time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub x: f64,
    pub y: ClassIndex,
    pub sampling_density: f64,
}

impl LabeledSample {
    pub fn new(x: f64, y: ClassIndex, sampling_density: f64) -> Self {
        Self { x, y, sampling_density }
    }

    pub fn unlabeled(&self) -> UnlabeledSample {
        UnlabeledSample { x: self.x }
    }
}

/// Draws `n` instances from `sampler` and labels them with the oracle.
pub fn draw_labeled<R: Rng + ?Sized>(
    model: &TaskModel,
    sampler: &SamplingDistribution,
    n: usize,
    rng: &mut R,
) -> Vec<LabeledSample> {
    (0..n)
        .map(|_| {
            let x = sampler.sample_x(model, rng);
            let y = model.label(x, rng);
            LabeledSample::new(x, y, sampler.density(model, x))
        })
        .collect()
}

/// Draws `n` unlabeled instances from the data marginal.
pub fn draw_unlabeled<R: Rng + ?Sized>(model: &TaskModel, n: usize, rng: &mut R) -> Vec<UnlabeledSample> {
    (0..n).map(|_| UnlabeledSample { x: model.sample_x(rng) }).collect()
}
