//! JSON experiment configuration.
//!
//! A [`ConfigDocument`] mirrors [`ExperimentSpec`] with every field optional
//! except `scenario`. Missing fields take the scenario's built-in values and
//! are listed in [`ParsedConfig::applied_defaults`].

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::IoError;
use crate::estimators::LocalCounting;
use crate::harness::{default_sampler_name, EstimatorSpec, ExperimentSpec, NamedSampler, Scenario};
use crate::synth::{GaussianComponent, SamplingDistribution, TaskModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samplers: Option<Vec<SamplerDocument>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<ClassifierDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimators: Option<Vec<EstimatorDocument>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_eval_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample_reps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDocument {
    pub priors: Vec<f64>,
    /// Mixture components of each class, in class order.
    pub components: Vec<Vec<ComponentDocument>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDocument {
    #[serde(default = "one")]
    pub weight: f64,
    pub mean: f64,
    pub std: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerDocument {
    pub kind: SamplerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    DataMarginal,
    SymmetricMixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorDocument {
    pub name: String,
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub params: serde_json::Map<String, Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FoldParams {
    k: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReweightedParams {
    k: usize,
    #[serde(default)]
    weight_cap: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbabilisticParams {
    #[serde(default)]
    window_radius: Option<f64>,
}

/// A validated spec plus the names of the fields that were defaulted.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub spec: ExperimentSpec,
    pub applied_defaults: Vec<String>,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ParsedConfig, IoError> {
    let doc: ConfigDocument = serde_json::from_str(text).map_err(|e| IoError::Config {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    resolve(&doc)
}

/// Applies defaults to `doc` and validates the result.
pub fn resolve(doc: &ConfigDocument) -> Result<ParsedConfig, IoError> {
    let mut base = ExperimentSpec::defaults_for(doc.scenario, 0);
    let mut applied = Vec::new();
    let mut take = |name: &str, present: bool| {
        if !present {
            applied.push(name.to_string());
        }
        present
    };

    if take("master_seed", doc.master_seed.is_some()) {
        base.master_seed = doc.master_seed.unwrap();
    }
    if take("task", doc.task.is_some()) {
        base.task = task_from(doc.task.as_ref().unwrap())?;
    }
    if take("samplers", doc.samplers.is_some()) {
        base.samplers = doc
            .samplers
            .as_ref()
            .unwrap()
            .iter()
            .enumerate()
            .map(|(i, s)| sampler_from(i, s))
            .collect::<Result<_, _>>()?;
    }
    let classifier = doc.classifier.unwrap_or(ClassifierDocument { bandwidth: None, epsilon: None });
    if take("classifier.bandwidth", classifier.bandwidth.is_some()) {
        base.classifier.bandwidth = classifier.bandwidth.unwrap();
    }
    if take("classifier.epsilon", classifier.epsilon.is_some()) {
        base.classifier.prior_weight = classifier.epsilon.unwrap();
    }
    base.classifier.class_count = base.task.class_count();
    if take("estimators", doc.estimators.is_some()) {
        base.estimators = doc
            .estimators
            .as_ref()
            .unwrap()
            .iter()
            .enumerate()
            .map(|(i, e)| estimator_from(i, e))
            .collect::<Result<_, _>>()?;
    }
    macro_rules! scalar {
        ($field:ident) => {
            if take(stringify!($field), doc.$field.is_some()) {
                base.$field = doc.$field.clone().unwrap();
            }
        };
    }
    scalar!(budgets);
    scalar!(repetitions);
    scalar!(pool_size);
    scalar!(true_eval_size);
    scalar!(subsample_reps);
    scalar!(train_size);

    base.validate().map_err(|e| IoError::Validation(e.to_string()))?;
    Ok(ParsedConfig { spec: base, applied_defaults: applied })
}

fn invalid(field: impl Into<String>, message: impl std::fmt::Display) -> IoError {
    IoError::Validation(format!("invalid `{}`: {message}", field.into()))
}

fn task_from(doc: &TaskDocument) -> Result<TaskModel, IoError> {
    let components = doc
        .components
        .iter()
        .map(|class| class.iter().map(|c| GaussianComponent::new(c.weight, c.mean, c.std)).collect())
        .collect();
    TaskModel::new(doc.priors.clone(), components).map_err(|e| invalid("task", e))
}

fn sampler_from(index: usize, doc: &SamplerDocument) -> Result<NamedSampler, IoError> {
    let field = |f: &str| format!("samplers[{index}].{f}");
    let distribution = match doc.kind {
        SamplerKind::DataMarginal => {
            if doc.d.is_some() || doc.std.is_some() || doc.priors.is_some() {
                return Err(invalid(field("kind"), "data-marginal takes no d, std or priors"));
            }
            SamplingDistribution::DataMarginal
        }
        SamplerKind::SymmetricMixture => SamplingDistribution::SymmetricMixture {
            distance: doc.d.ok_or_else(|| invalid(field("d"), "required for symmetric-mixture"))?,
            component_std: doc.std.unwrap_or(SamplingDistribution::DEFAULT_COMPONENT_STD),
            component_priors: doc.priors.unwrap_or([0.5, 0.5]),
        },
    };
    distribution.validate().map_err(|e| invalid(format!("samplers[{index}]"), e))?;
    let name = doc.name.clone().unwrap_or_else(|| default_sampler_name(&distribution));
    Ok(NamedSampler { name, distribution })
}

fn params<T: serde::de::DeserializeOwned>(index: usize, doc: &EstimatorDocument) -> Result<T, IoError> {
    serde_json::from_value(Value::Object(doc.params.clone()))
        .map_err(|e| invalid(format!("estimators[{index}].params"), e))
}

fn estimator_from(index: usize, doc: &EstimatorDocument) -> Result<EstimatorSpec, IoError> {
    Ok(match doc.name.as_str() {
        "subsample-baseline" => {
            params::<NoParams>(index, doc)?;
            EstimatorSpec::SubsampleBaseline
        }
        "generalization-error" => {
            params::<NoParams>(index, doc)?;
            EstimatorSpec::GeneralizationError
        }
        "cv" => EstimatorSpec::KFoldCv { k: params::<FoldParams>(index, doc)?.k },
        "self-labeling-cv" => EstimatorSpec::SelfLabelingCv { k: params::<FoldParams>(index, doc)?.k },
        "reweighted-cv" => {
            let p: ReweightedParams = params(index, doc)?;
            EstimatorSpec::ReweightedCv { k: p.k, weight_cap: p.weight_cap }
        }
        "probabilistic-performance" => {
            let p: ProbabilisticParams = params(index, doc)?;
            let counting = match p.window_radius {
                None => LocalCounting::KernelMass,
                Some(radius) => LocalCounting::Window { radius },
            };
            EstimatorSpec::ProbabilisticPerformance { counting }
        }
        other => {
            return Err(invalid(
                format!("estimators[{index}].name"),
                format!(
                    "unknown estimator {other:?} (expected subsample-baseline, generalization-error, cv, \
                     reweighted-cv, self-labeling-cv or probabilistic-performance)"
                ),
            ))
        }
    })
}

/// The fully explicit document for `spec`; parsing it yields `spec` again.
pub fn document_for(spec: &ExperimentSpec) -> ConfigDocument {
    let task = TaskDocument {
        priors: spec.task.class_priors().to_vec(),
        components: spec
            .task
            .class_components()
            .iter()
            .map(|class| class.iter().map(|c| ComponentDocument { weight: c.weight, mean: c.mean, std: c.std }).collect())
            .collect(),
    };
    let samplers = spec
        .samplers
        .iter()
        .map(|s| match &s.distribution {
            SamplingDistribution::DataMarginal => {
                SamplerDocument { kind: SamplerKind::DataMarginal, d: None, std: None, priors: None, name: Some(s.name.clone()) }
            }
            SamplingDistribution::SymmetricMixture { distance, component_std, component_priors } => SamplerDocument {
                kind: SamplerKind::SymmetricMixture,
                d: Some(*distance),
                std: Some(*component_std),
                priors: Some(*component_priors),
                name: Some(s.name.clone()),
            },
        })
        .collect();
    let estimators = spec.estimators.iter().map(estimator_document).collect();
    ConfigDocument {
        scenario: spec.scenario,
        master_seed: Some(spec.master_seed),
        task: Some(task),
        samplers: Some(samplers),
        classifier: Some(ClassifierDocument {
            bandwidth: Some(spec.classifier.bandwidth),
            epsilon: Some(spec.classifier.prior_weight),
        }),
        estimators: Some(estimators),
        budgets: Some(spec.budgets.clone()),
        repetitions: Some(spec.repetitions),
        pool_size: Some(spec.pool_size),
        true_eval_size: Some(spec.true_eval_size),
        subsample_reps: Some(spec.subsample_reps),
        train_size: Some(spec.train_size),
    }
}

fn estimator_document(e: &EstimatorSpec) -> EstimatorDocument {
    let mut params = serde_json::Map::new();
    let name = match e {
        EstimatorSpec::SubsampleBaseline => "subsample-baseline",
        EstimatorSpec::GeneralizationError => "generalization-error",
        EstimatorSpec::KFoldCv { k } => {
            params.insert("k".into(), (*k).into());
            "cv"
        }
        EstimatorSpec::SelfLabelingCv { k } => {
            params.insert("k".into(), (*k).into());
            "self-labeling-cv"
        }
        EstimatorSpec::ReweightedCv { k, weight_cap } => {
            params.insert("k".into(), (*k).into());
            if let Some(cap) = weight_cap {
                params.insert("weight_cap".into(), (*cap).into());
            }
            "reweighted-cv"
        }
        EstimatorSpec::ProbabilisticPerformance { counting } => {
            if let LocalCounting::Window { radius } = counting {
                params.insert("window_radius".into(), (*radius).into());
            }
            "probabilistic-performance"
        }
    };
    EstimatorDocument { name: name.to_string(), params }
}

/// Compact ids of the built-in scenario configurations.
pub const BUILTIN_IDS: [(&str, Scenario); 4] = [
    ("fig2", Scenario::EvalSizeDistribution),
    ("fig3", Scenario::CvFolds),
    ("fig5", Scenario::BiasSweep),
    ("fig6", Scenario::EstimatorComparison),
];
