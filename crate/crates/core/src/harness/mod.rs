//! Experiment definitions, the parallel repetition runner, and run records.

mod rng;
mod scenarios;

pub use rng::{derive_substream, Stream};
pub use scenarios::{
    apply_estimator, run_bias_sweep, run_cv_folds, run_estimator_comparison, run_eval_size_distribution,
    EstimationContext,
};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::stats::{summarize, BoxplotStats};

use crate::estimators::{EstimatorError, LocalCounting};
use crate::parzen::{ClassifierConfig, ParzenError};
use crate::synth::{SamplingDistribution, SynthError, TaskModel};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Classifier(#[from] ParzenError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("worker pool: {0}")]
    Workers(String),
}

impl HarnessError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid { field: field.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Spread of accuracy over many small evaluation sets for one fixed classifier.
    EvalSizeDistribution,
    /// Cross-validation with different fold counts on one fixed labeled set.
    CvFolds,
    /// Cross-validation vs. true accuracy as the sampler moves away from the boundary.
    BiasSweep,
    /// All estimators on nested budget prefixes of one acquisition sequence.
    EstimatorComparison,
}

impl Scenario {
    pub const ALL: [Scenario; 4] =
        [Self::EvalSizeDistribution, Self::CvFolds, Self::BiasSweep, Self::EstimatorComparison];

    pub fn id(&self) -> &'static str {
        match self {
            Self::EvalSizeDistribution => "eval-size-distribution",
            Self::CvFolds => "cv-folds",
            Self::BiasSweep => "bias-sweep",
            Self::EstimatorComparison => "estimator-comparison",
        }
    }

    /// Distinguishes scenarios inside substream paths.
    fn stream_tag(&self) -> u64 {
        match self {
            Self::EvalSizeDistribution => 1,
            Self::CvFolds => 2,
            Self::BiasSweep => 3,
            Self::EstimatorComparison => 4,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scenario {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|sc| sc.id() == s)
            .ok_or_else(|| HarnessError::invalid("scenario", format!("unknown scenario {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSampler {
    pub name: String,
    pub distribution: SamplingDistribution,
}

impl NamedSampler {
    pub fn new(distribution: SamplingDistribution) -> Self {
        Self { name: default_sampler_name(&distribution), distribution }
    }
}

pub fn default_sampler_name(s: &SamplingDistribution) -> String {
    match s {
        SamplingDistribution::DataMarginal => "unbiased".to_string(),
        SamplingDistribution::SymmetricMixture { distance, component_std, component_priors } => {
            let mut name = format!("mixture-d{distance:.2}");
            if *component_std != SamplingDistribution::DEFAULT_COMPONENT_STD {
                name.push_str(&format!("-s{component_std:.2}"));
            }
            if component_priors[0] != 0.5 {
                name.push_str(&format!("-p{:.2}", component_priors[0]));
            }
            name
        }
    }
}

/// An estimator together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EstimatorSpec {
    SubsampleBaseline,
    GeneralizationError,
    KFoldCv { k: usize },
    ReweightedCv { k: usize, weight_cap: Option<f64> },
    SelfLabelingCv { k: usize },
    ProbabilisticPerformance { counting: LocalCounting },
}

impl EstimatorSpec {
    /// Name used in the `estimator` column of the records.
    pub fn label(&self) -> String {
        match self {
            Self::SubsampleBaseline => "subsample-baseline".into(),
            Self::GeneralizationError => "generalization-error".into(),
            Self::KFoldCv { k } => format!("cv-{k}fold"),
            Self::ReweightedCv { k, weight_cap: None } => format!("reweighted-cv-{k}fold"),
            Self::ReweightedCv { k, weight_cap: Some(cap) } => format!("reweighted-cv-{k}fold-cap{cap}"),
            Self::SelfLabelingCv { k } => format!("self-labeling-cv-{k}fold"),
            Self::ProbabilisticPerformance { counting: LocalCounting::KernelMass } => "probabilistic-performance".into(),
            Self::ProbabilisticPerformance { counting: LocalCounting::Window { radius } } => {
                format!("probabilistic-performance-window{radius}")
            }
        }
    }

    pub fn folds(&self) -> Option<usize> {
        match self {
            Self::KFoldCv { k } | Self::ReweightedCv { k, .. } | Self::SelfLabelingCv { k } => Some(*k),
            _ => None,
        }
    }

    fn is_plain_cv(&self) -> bool {
        matches!(self, Self::KFoldCv { .. } | Self::ReweightedCv { .. })
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub task: TaskModel,
    pub samplers: Vec<NamedSampler>,
    /// Label budgets; evaluation-set sizes for the eval-size scenario.
    pub budgets: Vec<usize>,
    pub repetitions: usize,
    /// Unlabeled candidate pool size.
    pub pool_size: usize,
    /// Oracle evaluation-set size for the true baseline.
    pub true_eval_size: usize,
    /// Evaluation sets drawn per subsample-baseline estimate.
    pub subsample_reps: usize,
    /// Training-set size of the fixed classifier in the eval-size scenario.
    pub train_size: usize,
    pub classifier: ClassifierConfig,
    pub estimators: Vec<EstimatorSpec>,
    pub master_seed: u64,
}

pub const DEFAULT_POOL_SIZE: usize = 1000;
pub const DEFAULT_TRUE_EVAL_SIZE: usize = 2000;
pub const DEFAULT_SUBSAMPLE_REPS: usize = 100;
pub const DEFAULT_TRAIN_SIZE: usize = 100;

impl ExperimentSpec {
    /// The built-in configuration for `scenario`.
    pub fn defaults_for(scenario: Scenario, master_seed: u64) -> Self {
        let unbiased = || vec![NamedSampler::new(SamplingDistribution::DataMarginal)];
        let (samplers, budgets, repetitions, estimators) = match scenario {
            Scenario::EvalSizeDistribution => (unbiased(), vec![5, 10, 20, 100], 1000, vec![EstimatorSpec::SubsampleBaseline]),
            Scenario::CvFolds => (
                unbiased(),
                vec![20],
                50,
                [2, 5, 10, 20].into_iter().map(|k| EstimatorSpec::KFoldCv { k }).collect(),
            ),
            Scenario::BiasSweep => (
                (1..=12)
                    .map(|i| NamedSampler::new(SamplingDistribution::symmetric_mixture(0.25 * i as f64)))
                    .collect(),
                vec![30],
                50,
                vec![EstimatorSpec::KFoldCv { k: 3 }],
            ),
            Scenario::EstimatorComparison => (
                vec![
                    NamedSampler::new(SamplingDistribution::DataMarginal),
                    NamedSampler::new(SamplingDistribution::symmetric_mixture(0.3)),
                    NamedSampler::new(SamplingDistribution::symmetric_mixture(2.0)),
                ],
                vec![10, 30, 50],
                200,
                vec![
                    EstimatorSpec::SubsampleBaseline,
                    EstimatorSpec::GeneralizationError,
                    EstimatorSpec::KFoldCv { k: 3 },
                    EstimatorSpec::SelfLabelingCv { k: 3 },
                    EstimatorSpec::ReweightedCv { k: 3, weight_cap: None },
                    EstimatorSpec::ProbabilisticPerformance { counting: LocalCounting::KernelMass },
                ],
            ),
        };
        Self {
            scenario,
            task: TaskModel::default(),
            samplers,
            budgets,
            repetitions,
            pool_size: DEFAULT_POOL_SIZE,
            true_eval_size: DEFAULT_TRUE_EVAL_SIZE,
            subsample_reps: DEFAULT_SUBSAMPLE_REPS,
            train_size: DEFAULT_TRAIN_SIZE,
            classifier: ClassifierConfig::default(),
            estimators,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let positive = |field: &str, v: usize| {
            if v == 0 {
                Err(HarnessError::invalid(field, "must be >= 1"))
            } else {
                Ok(())
            }
        };
        positive("repetitions", self.repetitions)?;
        positive("pool_size", self.pool_size)?;
        positive("true_eval_size", self.true_eval_size)?;
        positive("subsample_reps", self.subsample_reps)?;
        positive("train_size", self.train_size)?;
        if self.budgets.is_empty() {
            return Err(HarnessError::invalid("budgets", "must not be empty"));
        }
        if self.budgets[0] == 0 {
            return Err(HarnessError::invalid("budgets", "must be >= 1"));
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::invalid("budgets", "must be strictly increasing"));
        }
        self.classifier.validate().map_err(|e| HarnessError::invalid("classifier", e.to_string()))?;
        if self.classifier.class_count != self.task.class_count() {
            return Err(HarnessError::invalid("classifier", "class count differs from the task"));
        }
        if self.samplers.is_empty() {
            return Err(HarnessError::invalid("samplers", "must not be empty"));
        }
        for (i, s) in self.samplers.iter().enumerate() {
            s.distribution.validate().map_err(|e| HarnessError::invalid(format!("samplers[{i}]"), e.to_string()))?;
            if s.name.is_empty() || s.name.contains([',', '"', '\n', '\r']) {
                return Err(HarnessError::invalid(format!("samplers[{i}].name"), "must be nonempty without commas, quotes or newlines"));
            }
        }
        let mut names: Vec<&str> = self.samplers.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(HarnessError::invalid("samplers", "sampler names must be unique"));
        }
        if self.estimators.is_empty() {
            return Err(HarnessError::invalid("estimators", "must not be empty"));
        }
        let smallest = self.budgets[0];
        for (i, e) in self.estimators.iter().enumerate() {
            let field = format!("estimators[{i}]");
            if let Some(k) = e.folds() {
                if k < 2 {
                    return Err(HarnessError::invalid(field, "k must be >= 2"));
                }
                let available = if matches!(e, EstimatorSpec::SelfLabelingCv { .. }) { smallest + self.pool_size } else { smallest };
                if k > available {
                    return Err(HarnessError::invalid(field, format!("k = {k} exceeds the smallest budget {smallest}")));
                }
            }
            match e {
                EstimatorSpec::ReweightedCv { weight_cap: Some(cap), .. } if !(*cap > 0.0 && cap.is_finite()) => {
                    return Err(HarnessError::invalid(field, "weight_cap must be > 0"));
                }
                EstimatorSpec::ProbabilisticPerformance { counting } => {
                    if self.task.class_count() != 2 {
                        return Err(HarnessError::invalid(field, "probabilistic performance needs exactly two classes"));
                    }
                    if let LocalCounting::Window { radius } = counting {
                        if !(*radius > 0.0 && radius.is_finite()) {
                            return Err(HarnessError::invalid(field, "radius must be > 0"));
                        }
                    }
                }
                _ => {}
            }
        }
        let mut labels: Vec<String> = self.estimators.iter().map(EstimatorSpec::label).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(HarnessError::invalid("estimators", "duplicate estimator"));
        }
        match self.scenario {
            Scenario::EvalSizeDistribution if self.estimators != [EstimatorSpec::SubsampleBaseline] => {
                Err(HarnessError::invalid("estimators", "eval-size-distribution only runs the subsample baseline"))
            }
            Scenario::BiasSweep if !self.estimators.iter().all(EstimatorSpec::is_plain_cv) => {
                Err(HarnessError::invalid("estimators", "bias-sweep only runs plain or reweighted cross-validation"))
            }
            Scenario::BiasSweep if self.budgets.len() != 1 => {
                Err(HarnessError::invalid("budgets", "bias-sweep takes exactly one labeled-set size"))
            }
            _ => Ok(()),
        }
    }
}

/// One estimate for one (repetition, sampler, budget, estimator) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub repetition: usize,
    pub sampler: String,
    pub budget: usize,
    pub estimator: String,
    pub estimate: BoxplotStats,
    pub true_baseline: f64,
    pub wall_ms: f64,
}

/// Runs `spec` on `workers` threads.
///
/// Records come back ordered by repetition, then sampler, budget and
/// estimator in configuration order, whatever the worker count.
pub fn run(spec: &ExperimentSpec, workers: usize) -> Result<Vec<RunRecord>, HarnessError> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Workers(e.to_string()))?;
    pool.install(|| match spec.scenario {
        Scenario::EvalSizeDistribution => run_eval_size_distribution(spec, &spec.budgets, spec.repetitions),
        Scenario::CvFolds => scenarios::run_fixed_set(spec, &spec.estimators, spec.repetitions),
        Scenario::BiasSweep => run_bias_sweep(spec, spec.budgets[0], spec.repetitions),
        Scenario::EstimatorComparison => run_estimator_comparison(spec),
    })
}

/// Maps each repetition to its records in parallel, preserving order.
fn per_repetition<F>(reps: usize, f: F) -> Result<Vec<RunRecord>, HarnessError>
where
    F: Fn(usize) -> Result<Vec<RunRecord>, HarnessError> + Sync + Send,
{
    let chunks: Vec<Vec<RunRecord>> = (0..reps).into_par_iter().map(f).collect::<Result<_, _>>()?;
    Ok(chunks.into_iter().flatten().collect())
}
