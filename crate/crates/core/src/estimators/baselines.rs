//! Oracle baselines: accuracy on a very large unbiased evaluation set, and
//! the spread of accuracy over many small ones.

use rand::Rng;

use super::{EstimatorError, PerformanceEstimate};
use crate::parzen::{accuracy_of, Classifier};
use crate::synth::{draw_labeled, SamplingDistribution, TaskModel};

/// Accuracy of `classifier` on `eval_size` fresh oracle-labeled draws.
pub fn true_accuracy<C, R>(classifier: &C, task: &TaskModel, eval_size: usize, rng: &mut R) -> f64
where
    C: Classifier + ?Sized,
    R: Rng + ?Sized,
{
    let eval = draw_labeled(task, &SamplingDistribution::DataMarginal, eval_size.max(1), rng);
    accuracy_of(classifier, &eval, None).expect("evaluation set is nonempty")
}

pub fn true_baseline<C, R>(
    classifier: &C,
    task: &TaskModel,
    eval_size: usize,
    rng: &mut R,
) -> Result<PerformanceEstimate, EstimatorError>
where
    C: Classifier + ?Sized,
    R: Rng + ?Sized,
{
    if eval_size == 0 {
        return Err(EstimatorError::ZeroCount { what: "evaluation size" });
    }
    Ok(PerformanceEstimate::Point(true_accuracy(classifier, task, eval_size, rng)))
}

/// Accuracy of the fixed `classifier` on `reps` independent evaluation sets
/// of size `budget`.
///
/// The classifier is not retrained, so each value is distributed as
/// `Binomial(budget, a)/budget` with `a` its true accuracy.
pub fn subsample_baseline<C, R>(
    classifier: &C,
    task: &TaskModel,
    budget: usize,
    reps: usize,
    rng: &mut R,
) -> Result<PerformanceEstimate, EstimatorError>
where
    C: Classifier + ?Sized,
    R: Rng + ?Sized,
{
    if budget == 0 {
        return Err(EstimatorError::ZeroCount { what: "budget" });
    }
    if reps == 0 {
        return Err(EstimatorError::ZeroCount { what: "repetitions" });
    }
    let values = (0..reps).map(|_| true_accuracy(classifier, task, budget, rng)).collect();
    Ok(PerformanceEstimate::Empirical(values))
}
