//! Runtime performance estimators and the oracle baselines they are judged
//! against.
//!
//! Estimators only see what an active learner has at runtime: the labeled
//! set (with `q(x)` recorded at acquisition), the unlabeled candidate pool
//! and the classifier. Baselines additionally get oracle access to the task.

mod baselines;
mod cv;
mod estimate;
mod local;

pub use baselines::{subsample_baseline, true_accuracy, true_baseline};
pub use cv::{assign_folds, cross_validate, kfold_cv, self_label_cv, CvOutcome, CvWeighting, FoldModel, SelfLabelOutcome};
pub use estimate::{BetaComponent, BetaMixture, PerformanceEstimate};
pub use local::{local_label_statistics, probabilistic_performance, LocalCounting, LocalLabelStatistics};

use thiserror::Error;

use crate::parzen::{ParzenError, ParzenModel};
use crate::synth::UnlabeledSample;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("no evaluation instances")]
    EmptyEvaluation,
    #[error("no labeled instances")]
    EmptyLabeled,
    #[error("fold count {k} invalid for {n} instances (need 2 <= k <= n)")]
    InvalidFolds { k: usize, n: usize },
    #[error("sample {index} has non-positive sampling density {density}")]
    NonPositiveDensity { index: usize, density: f64 },
    #[error("weight cap must be > 0, got {0}")]
    InvalidWeightCap(f64),
    #[error("probabilistic performance supports two classes only, sample {index} has label {label}")]
    NotBinary { index: usize, label: usize },
    #[error("bandwidth must be > 0, got {0}")]
    Bandwidth(f64),
    #[error("{what} must be >= 1")]
    ZeroCount { what: &'static str },
    #[error(transparent)]
    Classifier(#[from] ParzenError),
}

/// Sum of `1 − max_y p̂(y | x_i)` over the evaluation instances.
pub fn generalization_error_sum(model: &ParzenModel, eval: &[UnlabeledSample]) -> f64 {
    eval.iter()
        .map(|s| 1.0 - model.posterior(s.x).into_iter().fold(0.0, f64::max))
        .sum()
}

/// Accuracy implied by the model's own posteriors: `1 − err / |E|`.
pub fn generalization_error_estimate(
    model: &ParzenModel,
    eval: &[UnlabeledSample],
) -> Result<PerformanceEstimate, EstimatorError> {
    if eval.is_empty() {
        return Err(EstimatorError::EmptyEvaluation);
    }
    let err = generalization_error_sum(model, eval) / eval.len() as f64;
    Ok(PerformanceEstimate::Point((1.0 - err).clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::LabeledSample;
    use proptest::prelude::*;

    fn xs(values: &[f64]) -> Vec<UnlabeledSample> {
        values.iter().map(|&x| UnlabeledSample { x }).collect()
    }

    #[test]
    fn uniform_posteriors_give_chance_level() {
        let m = ParzenModel::fit(vec![], 0.2, 0.01, 2).unwrap();
        let est = generalization_error_estimate(&m, &xs(&[-1.0, 0.0, 1.0, 2.0])).unwrap();
        assert_eq!(est, PerformanceEstimate::Point(0.5));
        let m3 = ParzenModel::fit(vec![], 0.2, 0.01, 3).unwrap();
        let est3 = generalization_error_estimate(&m3, &xs(&[0.0, 5.0])).unwrap().mean();
        assert!((est3 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sum_form_matches_hand_evaluation() {
        // three points whose max-posteriors are computed by hand from kernel masses
        let train = vec![LabeledSample::new(0.0, 0, 1.0), LabeledSample::new(0.0, 1, 1.0), LabeledSample::new(3.0, 1, 1.0)];
        let m = ParzenModel::fit(train, 0.5, 0.0, 2).unwrap();
        let eval = xs(&[0.0, 3.0, 1.5]);
        let k = |d: f64| (-d * d / 0.5).exp();
        let max_post = |x: f64| {
            let m0 = k(x);
            let m1 = k(x) + k(x - 3.0);
            m0.max(m1) / (m0 + m1)
        };
        let err: f64 = [0.0, 3.0, 1.5].iter().map(|&x| 1.0 - max_post(x)).sum();
        assert!((generalization_error_sum(&m, &eval) - err).abs() < 1e-12);
        let acc = generalization_error_estimate(&m, &eval).unwrap().mean();
        assert!((acc - (1.0 - err / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn normalization_arithmetic() {
        // max-posteriors (0.9, 0.6, 1.0): err = 0.5, accuracy = 1 − 0.5/3
        let err: f64 = [0.9, 0.6, 1.0].iter().map(|m: &f64| 1.0 - m).sum();
        assert!((1.0 - err / 3.0 - 0.833_333).abs() < 1e-6);
    }

    #[test]
    fn confident_model_scores_one() {
        let train = vec![LabeledSample::new(0.0, 1, 1.0)];
        let m = ParzenModel::fit(train, 0.2, 0.0, 2).unwrap();
        let est = generalization_error_estimate(&m, &xs(&[0.0, 0.1, -0.3])).unwrap();
        assert_eq!(est, PerformanceEstimate::Point(1.0));
    }

    #[test]
    fn empty_evaluation_rejected() {
        let m = ParzenModel::fit(vec![], 0.2, 0.01, 2).unwrap();
        assert_eq!(generalization_error_estimate(&m, &[]), Err(EstimatorError::EmptyEvaluation));
    }

    proptest! {
        #[test]
        fn permutation_invariant(
            train in prop::collection::vec((-3.0..3.0f64, 0..2usize), 1..15),
            mut eval in prop::collection::vec(-4.0..4.0f64, 1..30),
        ) {
            let m = ParzenModel::fit(
                train.into_iter().map(|(x, y)| LabeledSample::new(x, y, 1.0)).collect(), 0.2, 0.01, 2,
            ).unwrap();
            let a = generalization_error_estimate(&m, &xs(&eval)).unwrap().mean();
            eval.reverse();
            let half = eval.len() / 2;
            eval.rotate_left(half);
            let b = generalization_error_estimate(&m, &xs(&eval)).unwrap().mean();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
