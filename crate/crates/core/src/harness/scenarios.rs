//! The four experiment scenarios.
//!
//! Substream paths always start with `[scenario tag, repetition | SHARED]`,
//! so a repetition's randomness never depends on how many other repetitions
//! exist or which thread runs them.

use std::time::Instant;

use super::{derive_substream, per_repetition, EstimatorSpec, ExperimentSpec, HarnessError, NamedSampler, RunRecord, Stream};
use crate::estimators::{
    self, cross_validate, generalization_error_estimate, kfold_cv, probabilistic_performance, self_label_cv,
    subsample_baseline, true_accuracy, CvWeighting, PerformanceEstimate,
};
use crate::parzen::{accuracy_of, ClassifierConfig, ParzenModel};
use crate::stats::BoxplotStats;
use crate::synth::{draw_labeled, draw_unlabeled, LabeledSample, SamplingDistribution, TaskModel, UnlabeledSample};

/// Repetition slot for state shared by all repetitions.
const SHARED: u64 = u64::MAX;

// stage identifiers inside a repetition
const STAGE_TRAIN: u64 = 0;
const STAGE_TRUTH: u64 = 1;
const STAGE_POOL: u64 = 2;
const STAGE_SEQUENCE: u64 = 3;
const STAGE_ESTIMATOR: u64 = 4;
const STAGE_EVAL: u64 = 5;

fn stream(spec: &ExperimentSpec, path: &[u64]) -> Stream {
    let mut full = Vec::with_capacity(path.len() + 1);
    full.push(spec.scenario.stream_tag());
    full.extend_from_slice(path);
    derive_substream(spec.master_seed, &full)
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Everything an estimator may look at for one budget prefix.
pub struct EstimationContext<'a> {
    pub task: &'a TaskModel,
    pub labeled: &'a [LabeledSample],
    pub pool: &'a [UnlabeledSample],
    /// Classifier trained on `labeled`.
    pub model: &'a ParzenModel,
    pub classifier: &'a ClassifierConfig,
    pub subsample_reps: usize,
}

/// Evaluates one estimator. Only the subsample baseline touches the task
/// (oracle access); the rest use the labeled set, pool and model.
pub fn apply_estimator(
    estimator: &EstimatorSpec,
    ctx: &EstimationContext<'_>,
    rng: &mut Stream,
) -> Result<PerformanceEstimate, HarnessError> {
    let est = match *estimator {
        EstimatorSpec::SubsampleBaseline => {
            subsample_baseline(ctx.model, ctx.task, ctx.labeled.len(), ctx.subsample_reps, rng)?
        }
        EstimatorSpec::GeneralizationError => generalization_error_estimate(ctx.model, ctx.pool)?,
        EstimatorSpec::KFoldCv { k } => kfold_cv(ctx.labeled, k, ctx.classifier, rng, CvWeighting::Uniform)?,
        EstimatorSpec::ReweightedCv { k, weight_cap } => {
            kfold_cv(ctx.labeled, k, ctx.classifier, rng, CvWeighting::InverseDensity { cap: weight_cap })?
        }
        EstimatorSpec::SelfLabelingCv { k } => self_label_cv(ctx.labeled, ctx.pool, k, ctx.classifier, rng)?.estimate,
        EstimatorSpec::ProbabilisticPerformance { counting } => {
            probabilistic_performance(ctx.labeled, ctx.pool, ctx.classifier.bandwidth, counting)?
        }
    };
    Ok(est)
}

#[allow(clippy::too_many_arguments)]
fn record(
    spec: &ExperimentSpec,
    repetition: usize,
    sampler: &NamedSampler,
    budget: usize,
    estimator: String,
    estimate: BoxplotStats,
    true_baseline: f64,
    wall_ms: f64,
) -> RunRecord {
    RunRecord {
        scenario: spec.scenario.id().to_string(),
        repetition,
        sampler: sampler.name.clone(),
        budget,
        estimator,
        estimate,
        true_baseline,
        wall_ms,
    }
}

/// One classifier trained on `train_size` draws; each repetition scores it
/// on a fresh evaluation set of every size.
pub fn run_eval_size_distribution(
    spec: &ExperimentSpec,
    sizes: &[usize],
    reps: usize,
) -> Result<Vec<RunRecord>, HarnessError> {
    let sampler = &spec.samplers[0];
    let training = draw_labeled(&spec.task, &sampler.distribution, spec.train_size, &mut stream(spec, &[SHARED, STAGE_TRAIN]));
    let model = spec.classifier.fit(training)?;
    let truth = true_accuracy(&model, &spec.task, spec.true_eval_size, &mut stream(spec, &[SHARED, STAGE_TRUTH]));
    let label = EstimatorSpec::SubsampleBaseline.label();
    per_repetition(reps, |rep| {
        sizes
            .iter()
            .enumerate()
            .map(|(i, &size)| {
                let start = Instant::now();
                let value = true_accuracy(&model, &spec.task, size, &mut stream(spec, &[rep as u64, STAGE_EVAL, i as u64]));
                Ok(record(spec, rep, sampler, size, label.clone(), BoxplotStats::point(value), truth, elapsed_ms(start)))
            })
            .collect()
    })
}

/// Repeats randomized estimators on one fixed labeled set per budget.
pub(super) fn run_fixed_set(
    spec: &ExperimentSpec,
    estimators: &[EstimatorSpec],
    reps: usize,
) -> Result<Vec<RunRecord>, HarnessError> {
    struct Fixed {
        labeled: Vec<LabeledSample>,
        model: ParzenModel,
        truth: f64,
    }
    let pool = draw_unlabeled(&spec.task, spec.pool_size, &mut stream(spec, &[SHARED, STAGE_POOL]));
    let mut fixed = Vec::new();
    for (s, sampler) in spec.samplers.iter().enumerate() {
        let mut per_budget = Vec::new();
        for (b, &budget) in spec.budgets.iter().enumerate() {
            let path = [SHARED, STAGE_SEQUENCE, s as u64, b as u64];
            let labeled = draw_labeled(&spec.task, &sampler.distribution, budget, &mut stream(spec, &path));
            let model = spec.classifier.fit(labeled.clone())?;
            let path = [SHARED, STAGE_TRUTH, s as u64, b as u64];
            let truth = true_accuracy(&model, &spec.task, spec.true_eval_size, &mut stream(spec, &path));
            per_budget.push(Fixed { labeled, model, truth });
        }
        fixed.push(per_budget);
    }
    per_repetition(reps, |rep| {
        let mut out = Vec::new();
        for (s, sampler) in spec.samplers.iter().enumerate() {
            for (b, &budget) in spec.budgets.iter().enumerate() {
                let f = &fixed[s][b];
                let ctx = EstimationContext {
                    task: &spec.task,
                    labeled: &f.labeled,
                    pool: &pool,
                    model: &f.model,
                    classifier: &spec.classifier,
                    subsample_reps: spec.subsample_reps,
                };
                for (e, est) in estimators.iter().enumerate() {
                    let start = Instant::now();
                    let mut rng = stream(spec, &[rep as u64, STAGE_ESTIMATOR, s as u64, b as u64, e as u64]);
                    let value = apply_estimator(est, &ctx, &mut rng)?;
                    out.push(record(spec, rep, sampler, budget, est.label(), value.summary(), f.truth, elapsed_ms(start)));
                }
            }
        }
        Ok(out)
    })
}

/// k-fold CV for each fold count on one fixed labeled set; the reference is
/// the true accuracy of the model trained on the whole set.
pub fn run_cv_folds(spec: &ExperimentSpec, folds: &[usize], reps: usize) -> Result<Vec<RunRecord>, HarnessError> {
    let estimators: Vec<EstimatorSpec> = folds.iter().map(|&k| EstimatorSpec::KFoldCv { k }).collect();
    run_fixed_set(spec, &estimators, reps)
}

/// For each sampler: CV accuracy on a biased labeled set next to the true
/// accuracy of the fold models, averaged over folds and measured on an
/// unbiased hold-out set.
pub fn run_bias_sweep(spec: &ExperimentSpec, labeled_size: usize, reps: usize) -> Result<Vec<RunRecord>, HarnessError> {
    per_repetition(reps, |rep| {
        let r = rep as u64;
        let mut out = Vec::new();
        for (s, sampler) in spec.samplers.iter().enumerate() {
            let labeled = draw_labeled(&spec.task, &sampler.distribution, labeled_size, &mut stream(spec, &[r, STAGE_SEQUENCE, s as u64]));
            let holdout = draw_labeled(
                &spec.task,
                &SamplingDistribution::DataMarginal,
                spec.true_eval_size,
                &mut stream(spec, &[r, STAGE_TRUTH, s as u64]),
            );
            for (e, est) in spec.estimators.iter().enumerate() {
                let start = Instant::now();
                let (k, weighting) = match *est {
                    EstimatorSpec::KFoldCv { k } => (k, CvWeighting::Uniform),
                    EstimatorSpec::ReweightedCv { k, weight_cap } => (k, CvWeighting::InverseDensity { cap: weight_cap }),
                    _ => return Err(HarnessError::invalid("estimators", "bias-sweep only runs cross-validation")),
                };
                let mut rng = stream(spec, &[r, STAGE_ESTIMATOR, s as u64, e as u64]);
                let outcome = cross_validate(&labeled, k, &spec.classifier, &mut rng, weighting)?;
                let mut truth = 0.0;
                for fold in &outcome.folds {
                    truth += accuracy_of(&fold.model, &holdout, None).map_err(estimators::EstimatorError::from)?;
                }
                truth /= outcome.folds.len() as f64;
                let estimate = BoxplotStats::point(outcome.accuracy);
                out.push(record(spec, rep, sampler, labeled_size, est.label(), estimate, truth, elapsed_ms(start)));
            }
        }
        Ok(out)
    })
}

/// One-shot pipeline per repetition: each sampler produces one acquisition
/// sequence, and every budget is a prefix of it, so smaller budgets are
/// nested inside larger ones. All estimators share one unbiased pool.
pub fn run_estimator_comparison(spec: &ExperimentSpec) -> Result<Vec<RunRecord>, HarnessError> {
    let longest = *spec.budgets.last().expect("validated nonempty");
    per_repetition(spec.repetitions, |rep| {
        let r = rep as u64;
        let pool = draw_unlabeled(&spec.task, spec.pool_size, &mut stream(spec, &[r, STAGE_POOL]));
        let mut out = Vec::new();
        for (s, sampler) in spec.samplers.iter().enumerate() {
            let sequence = draw_labeled(&spec.task, &sampler.distribution, longest, &mut stream(spec, &[r, STAGE_SEQUENCE, s as u64]));
            for (b, &budget) in spec.budgets.iter().enumerate() {
                let labeled = &sequence[..budget];
                let model = spec.classifier.fit(labeled.to_vec())?;
                let path = [r, STAGE_TRUTH, s as u64, b as u64];
                let truth = true_accuracy(&model, &spec.task, spec.true_eval_size, &mut stream(spec, &path));
                let ctx = EstimationContext {
                    task: &spec.task,
                    labeled,
                    pool: &pool,
                    model: &model,
                    classifier: &spec.classifier,
                    subsample_reps: spec.subsample_reps,
                };
                for (e, est) in spec.estimators.iter().enumerate() {
                    let start = Instant::now();
                    let mut rng = stream(spec, &[r, STAGE_ESTIMATOR, s as u64, b as u64, e as u64]);
                    let value = apply_estimator(est, &ctx, &mut rng)?;
                    out.push(record(spec, rep, sampler, budget, est.label(), value.summary(), truth, elapsed_ms(start)));
                }
            }
        }
        Ok(out)
    })
}

#[cfg(test)]
mod tests {
    use super::super::{run, Scenario};
    use super::*;

    fn small(scenario: Scenario) -> ExperimentSpec {
        let mut spec = ExperimentSpec::defaults_for(scenario, 11);
        spec.repetitions = 4;
        spec.pool_size = 200;
        spec.true_eval_size = 500;
        spec.subsample_reps = 10;
        spec
    }

    fn strip_time(mut records: Vec<RunRecord>) -> Vec<RunRecord> {
        for r in &mut records {
            r.wall_ms = 0.0;
        }
        records
    }

    #[test]
    fn record_order_is_canonical() {
        let spec = small(Scenario::EstimatorComparison);
        let records = run(&spec, 2).unwrap();
        assert_eq!(records.len(), 4 * 3 * 3 * 6);
        let mut expected = Vec::new();
        for rep in 0..4 {
            for s in &spec.samplers {
                for b in &spec.budgets {
                    for e in &spec.estimators {
                        expected.push((rep, s.name.clone(), *b, e.label()));
                    }
                }
            }
        }
        let got: Vec<_> = records.iter().map(|r| (r.repetition, r.sampler.clone(), r.budget, r.estimator.clone())).collect();
        assert_eq!(got, expected);
        for r in &records {
            assert!((0.0..=1.0).contains(&r.estimate.mean), "{r:?}");
            assert!((0.0..=1.0).contains(&r.true_baseline), "{r:?}");
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        for sc in Scenario::ALL {
            let mut spec = small(sc);
            if sc == Scenario::BiasSweep {
                spec.samplers.truncate(3);
            }
            if sc == Scenario::EvalSizeDistribution {
                spec.repetitions = 20;
            }
            let one = strip_time(run(&spec, 1).unwrap());
            let many = strip_time(run(&spec, 4).unwrap());
            assert_eq!(one, many, "{sc}");
        }
    }

    #[test]
    fn repetitions_are_isolated() {
        let mut spec = small(Scenario::EstimatorComparison);
        spec.repetitions = 3;
        let three = strip_time(run(&spec, 2).unwrap());
        spec.repetitions = 2;
        let two = strip_time(run(&spec, 2).unwrap());
        let prefix: Vec<_> = three.iter().filter(|r| r.repetition < 2).cloned().collect();
        assert_eq!(prefix, two);
    }

    #[test]
    fn budgets_are_nested_prefixes() {
        let spec = small(Scenario::EstimatorComparison);
        let rep = 1u64;
        let longest = *spec.budgets.last().unwrap();
        for (s, sampler) in spec.samplers.iter().enumerate() {
            let seq = draw_labeled(&spec.task, &sampler.distribution, longest, &mut stream(&spec, &[rep, STAGE_SEQUENCE, s as u64]));
            // a shorter draw from the same stream is the prefix of the longer one
            let short = draw_labeled(&spec.task, &sampler.distribution, 10, &mut stream(&spec, &[rep, STAGE_SEQUENCE, s as u64]));
            assert_eq!(&seq[..10], &short[..]);
            assert_eq!(&seq[..30][..10], &seq[..10]);
        }
    }

    #[test]
    fn subsample_budget_follows_labeled_size() {
        let spec = small(Scenario::EstimatorComparison);
        let records = run(&spec, 1).unwrap();
        for r in records.iter().filter(|r| r.estimator == "subsample-baseline") {
            assert_eq!(r.estimate.n, spec.subsample_reps);
            assert!((0.0..=1.0).contains(&r.estimate.whisker_low) && r.estimate.whisker_high <= 1.0);
        }
    }

    #[test]
    fn two_instance_two_fold_runs() {
        let mut spec = small(Scenario::CvFolds);
        spec.budgets = vec![2];
        spec.estimators = vec![EstimatorSpec::KFoldCv { k: 2 }];
        let records = run(&spec, 1).unwrap();
        assert_eq!(records.len(), 4);
    }

    #[test]
    fn huge_evaluation_set_matches_true_baseline() {
        // both sides are 2·10^5-draw estimates of the same accuracy
        let mut spec = small(Scenario::EvalSizeDistribution);
        spec.budgets = vec![200_000];
        spec.repetitions = 1;
        spec.true_eval_size = 200_000;
        let records = run(&spec, 1).unwrap();
        assert_eq!(records.len(), 1);
        assert!((records[0].estimate.mean - records[0].true_baseline).abs() < 0.005, "{:?}", records[0]);
    }
}
