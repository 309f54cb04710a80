//! Cross-validation estimators: plain, inverse-density reweighted, and
//! cross-validation over a self-labeled candidate pool.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{EstimatorError, PerformanceEstimate};
use crate::parzen::{weighted_accuracy, Classifier, ClassifierConfig, ParzenModel};
use crate::synth::{LabeledSample, UnlabeledSample};

/// How held-out predictions are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum CvWeighting {
    #[default]
    Uniform,
    /// Weight `1/q(x)` using the density recorded at acquisition, optionally
    /// capped from above.
    InverseDensity { cap: Option<f64> },
}

/// A model trained on all folds but one.
#[derive(Debug, Clone)]
pub struct FoldModel {
    pub model: ParzenModel,
    /// Indices (into the cross-validated set) of the held-out instances.
    pub held_out: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub accuracy: f64,
    pub folds: Vec<FoldModel>,
}

/// Randomly maps `n` instances to `k` folds of near-equal size.
///
/// Fold sizes differ by at most one. When `k == n` every fold is a singleton
/// and no randomness is consumed.
pub fn assign_folds<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    if k != n {
        order.shuffle(rng);
    }
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, idx) in order.into_iter().enumerate() {
        folds[pos % k].push(idx);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

fn check_folds(k: usize, n: usize) -> Result<(), EstimatorError> {
    if k < 2 || k > n {
        return Err(EstimatorError::InvalidFolds { k, n });
    }
    Ok(())
}

fn inverse_density_weights(labeled: &[LabeledSample], cap: Option<f64>) -> Result<Vec<f64>, EstimatorError> {
    if let Some(c) = cap {
        if c.is_nan() || c <= 0.0 {
            return Err(EstimatorError::InvalidWeightCap(c));
        }
    }
    labeled
        .iter()
        .enumerate()
        .map(|(index, s)| {
            if !(s.sampling_density > 0.0 && s.sampling_density.is_finite()) {
                return Err(EstimatorError::NonPositiveDensity { index, density: s.sampling_density });
            }
            let w = 1.0 / s.sampling_density;
            Ok(cap.map_or(w, |c| w.min(c)))
        })
        .collect()
}

/// Trains `training(fold)` for each fold and scores every held-out instance.
fn run_folds<R, F>(
    data: &[LabeledSample],
    folds: Vec<Vec<usize>>,
    config: &ClassifierConfig,
    rng: &mut R,
    mut training: F,
) -> Result<(Vec<bool>, Vec<FoldModel>), EstimatorError>
where
    R: Rng + ?Sized,
    F: FnMut(&[usize], &mut R) -> Vec<usize>,
{
    let mut in_fold = vec![usize::MAX; data.len()];
    for (f, members) in folds.iter().enumerate() {
        for &i in members {
            in_fold[i] = f;
        }
    }
    let mut correct = vec![false; data.len()];
    let mut models = Vec::with_capacity(folds.len());
    for (f, held_out) in folds.into_iter().enumerate() {
        let candidates: Vec<usize> = (0..data.len()).filter(|&i| in_fold[i] != f).collect();
        let chosen = training(&candidates, rng);
        let model = config.fit(chosen.iter().map(|&i| data[i]).collect())?;
        for &i in &held_out {
            correct[i] = model.predict(data[i].x) == data[i].y;
        }
        models.push(FoldModel { model, held_out });
    }
    Ok((correct, models))
}

/// k-fold cross-validation returning the fold models alongside the accuracy.
pub fn cross_validate<R: Rng + ?Sized>(
    labeled: &[LabeledSample],
    k: usize,
    config: &ClassifierConfig,
    rng: &mut R,
    weighting: CvWeighting,
) -> Result<CvOutcome, EstimatorError> {
    check_folds(k, labeled.len())?;
    let weights = match weighting {
        CvWeighting::Uniform => None,
        CvWeighting::InverseDensity { cap } => Some(inverse_density_weights(labeled, cap)?),
    };
    let folds = assign_folds(labeled.len(), k, rng);
    let (correct, folds) = run_folds(labeled, folds, config, rng, |candidates, _| candidates.to_vec())?;
    let accuracy = weighted_accuracy(&correct, weights.as_deref())?;
    Ok(CvOutcome { accuracy, folds })
}

/// k-fold cross-validation accuracy; `k = |labeled|` is leave-one-out.
pub fn kfold_cv<R: Rng + ?Sized>(
    labeled: &[LabeledSample],
    k: usize,
    config: &ClassifierConfig,
    rng: &mut R,
    weighting: CvWeighting,
) -> Result<PerformanceEstimate, EstimatorError> {
    cross_validate(labeled, k, config, rng, weighting).map(|o| PerformanceEstimate::Point(o.accuracy))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfLabelOutcome {
    pub estimate: PerformanceEstimate,
    /// The pool was empty and plain k-fold CV was used instead.
    pub fell_back: bool,
}

/// Cross-validation over `labeled ∪ pool`, with the pool labeled by the
/// classifier trained on `labeled`.
///
/// Each fold trains on a fresh uniform subset (without replacement) of the
/// remaining instances, sized like the original labeled set, and scores all
/// held-out instances with self-labels taken as ground truth.
pub fn self_label_cv<R: Rng + ?Sized>(
    labeled: &[LabeledSample],
    pool: &[UnlabeledSample],
    k: usize,
    config: &ClassifierConfig,
    rng: &mut R,
) -> Result<SelfLabelOutcome, EstimatorError> {
    if labeled.is_empty() {
        return Err(EstimatorError::EmptyLabeled);
    }
    if pool.is_empty() {
        let estimate = kfold_cv(labeled, k, config, rng, CvWeighting::Uniform)?;
        return Ok(SelfLabelOutcome { estimate, fell_back: true });
    }
    let base = config.fit(labeled.to_vec())?;
    let union: Vec<LabeledSample> = labeled
        .iter()
        .copied()
        .chain(pool.iter().map(|s| LabeledSample::new(s.x, base.predict(s.x), 1.0)))
        .collect();
    check_folds(k, union.len())?;
    let budget = labeled.len();
    let folds = assign_folds(union.len(), k, rng);
    let (correct, _) = run_folds(&union, folds, config, rng, |candidates, rng| {
        let take = budget.min(candidates.len());
        let mut picked: Vec<usize> =
            index::sample(rng, candidates.len(), take).into_iter().map(|j| candidates[j]).collect();
        picked.sort_unstable();
        picked
    })?;
    let accuracy = weighted_accuracy(&correct, None)?;
    Ok(SelfLabelOutcome { estimate: PerformanceEstimate::Point(accuracy), fell_back: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{draw_labeled, draw_unlabeled, SamplingDistribution, TaskModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn cfg() -> ClassifierConfig {
        ClassifierConfig::default()
    }

    #[test]
    fn folds_are_balanced_partitions() {
        for (n, k) in [(20, 3), (7, 7), (10, 2), (31, 5)] {
            let folds = assign_folds(n, k, &mut rng(1));
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..n).collect::<Vec<_>>());
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1, "{sizes:?}");
        }
    }

    #[test]
    fn fold_count_errors() {
        let data = vec![LabeledSample::new(0.0, 0, 1.0); 3];
        for k in [0, 1, 4] {
            assert_eq!(
                kfold_cv(&data, k, &cfg(), &mut rng(0), CvWeighting::Uniform),
                Err(EstimatorError::InvalidFolds { k, n: 3 })
            );
        }
    }

    #[test]
    fn single_class_is_perfect() {
        let data: Vec<_> = (0..12).map(|i| LabeledSample::new(0.1 * i as f64, 1, 1.0)).collect();
        for k in [2, 3, 12] {
            assert_eq!(kfold_cv(&data, k, &cfg(), &mut rng(k as u64), CvWeighting::Uniform).unwrap().mean(), 1.0);
        }
    }

    #[test]
    fn reweighting_rejects_bad_densities() {
        let mut data: Vec<_> = (0..6).map(|i| LabeledSample::new(i as f64, i % 2, 0.3)).collect();
        data[4].sampling_density = 0.0;
        assert_eq!(
            kfold_cv(&data, 3, &cfg(), &mut rng(0), CvWeighting::InverseDensity { cap: None }),
            Err(EstimatorError::NonPositiveDensity { index: 4, density: 0.0 })
        );
        data[4].sampling_density = 0.3;
        assert_eq!(
            kfold_cv(&data, 3, &cfg(), &mut rng(0), CvWeighting::InverseDensity { cap: Some(0.0) }),
            Err(EstimatorError::InvalidWeightCap(0.0))
        );
    }

    #[test]
    fn constant_density_reweighting_is_identity() {
        let task = TaskModel::default();
        for seed in 0..20 {
            let mut data = draw_labeled(&task, &SamplingDistribution::DataMarginal, 25, &mut rng(seed));
            for s in &mut data {
                s.sampling_density = 0.37;
            }
            let plain = kfold_cv(&data, 3, &cfg(), &mut rng(100 + seed), CvWeighting::Uniform).unwrap().mean();
            let weighted = kfold_cv(&data, 3, &cfg(), &mut rng(100 + seed), CvWeighting::InverseDensity { cap: None })
                .unwrap()
                .mean();
            assert_eq!(plain.to_bits(), weighted.to_bits());
        }
    }

    #[test]
    fn reweighting_matches_hand_computation() {
        // leave-one-out is deterministic, so the weighted value can be rebuilt by hand
        let task = TaskModel::default();
        let data = draw_labeled(&task, &SamplingDistribution::symmetric_mixture(0.6), 12, &mut rng(3));
        let got = kfold_cv(&data, 12, &cfg(), &mut rng(0), CvWeighting::InverseDensity { cap: None }).unwrap().mean();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..data.len() {
            let rest: Vec<_> = data.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, s)| *s).collect();
            let m = cfg().fit(rest).unwrap();
            let w = 1.0 / data[i].sampling_density;
            den += w;
            if m.predict(data[i].x) == data[i].y {
                num += w;
            }
        }
        assert!((got - num / den).abs() < 1e-12);

        let capped = kfold_cv(&data, 12, &cfg(), &mut rng(0), CvWeighting::InverseDensity { cap: Some(1e-9) })
            .unwrap()
            .mean();
        let plain = kfold_cv(&data, 12, &cfg(), &mut rng(0), CvWeighting::Uniform).unwrap().mean();
        assert_eq!(capped, plain);
    }

    #[test]
    fn leave_one_out_ignores_the_stream() {
        let task = TaskModel::default();
        let data = draw_labeled(&task, &SamplingDistribution::DataMarginal, 20, &mut rng(8));
        let a = kfold_cv(&data, 20, &cfg(), &mut rng(1), CvWeighting::Uniform).unwrap();
        let b = kfold_cv(&data, 20, &cfg(), &mut rng(2), CvWeighting::Uniform).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_instances_two_folds() {
        let data = vec![LabeledSample::new(-0.1, 0, 1.0), LabeledSample::new(0.1, 1, 1.0)];
        let out = cross_validate(&data, 2, &cfg(), &mut rng(0), CvWeighting::Uniform).unwrap();
        assert!(out.folds.iter().all(|f| f.model.training().len() == 1));
        // each fold trains on the other class only
        assert_eq!(out.accuracy, 0.0);
    }

    #[test]
    fn folds_are_reproducible() {
        let task = TaskModel::default();
        let data = draw_labeled(&task, &SamplingDistribution::DataMarginal, 30, &mut rng(5));
        let pool = draw_unlabeled(&task, 200, &mut rng(6));
        assert_eq!(
            kfold_cv(&data, 3, &cfg(), &mut rng(7), CvWeighting::Uniform),
            kfold_cv(&data, 3, &cfg(), &mut rng(7), CvWeighting::Uniform)
        );
        assert_eq!(
            self_label_cv(&data, &pool, 3, &cfg(), &mut rng(7)),
            self_label_cv(&data, &pool, 3, &cfg(), &mut rng(7))
        );
    }

    #[test]
    fn self_label_with_far_pool() {
        let data = vec![LabeledSample::new(-0.5, 0, 1.0), LabeledSample::new(0.5, 1, 1.0), LabeledSample::new(0.6, 1, 1.0)];
        let pool: Vec<_> = (0..30).map(|i| UnlabeledSample { x: 500.0 + i as f64 }).collect();
        let base = cfg().fit(data.clone()).unwrap();
        assert!(pool.iter().all(|s| base.predict(s.x) == 0));
        let out = self_label_cv(&data, &pool, 3, &cfg(), &mut rng(1)).unwrap();
        assert!(!out.fell_back);
        assert!((0.0..=1.0).contains(&out.estimate.mean()));
    }

    #[test]
    fn self_label_falls_back_on_empty_pool() {
        let data: Vec<_> = (0..9).map(|i| LabeledSample::new(i as f64 * 0.3 - 1.2, usize::from(i >= 4), 1.0)).collect();
        let out = self_label_cv(&data, &[], 3, &cfg(), &mut rng(4)).unwrap();
        assert!(out.fell_back);
        assert_eq!(out.estimate, kfold_cv(&data, 3, &cfg(), &mut rng(4), CvWeighting::Uniform).unwrap());
        assert_eq!(self_label_cv(&[], &[], 3, &cfg(), &mut rng(4)), Err(EstimatorError::EmptyLabeled));
    }

    #[test]
    fn self_label_equals_union_cv_when_subsets_are_whole() {
        // with k = 2 the training side of each fold has exactly |labeled| instances,
        // so the random subset is the whole side and the result is CV on the union
        let data: Vec<_> = [-2.0, -1.8, -1.5, -1.1, 1.0, 1.3, 1.9, 2.2]
            .iter()
            .map(|&x: &f64| LabeledSample::new(x, usize::from(x > 0.0), 1.0))
            .collect();
        let pool: Vec<_> = data.iter().map(LabeledSample::unlabeled).collect();
        let base = cfg().fit(data.clone()).unwrap();
        assert!(data.iter().all(|s| base.predict(s.x) == s.y));
        let union: Vec<_> = data.iter().chain(data.iter()).copied().collect();
        for seed in 0..10 {
            let a = self_label_cv(&data, &pool, 2, &cfg(), &mut rng(seed)).unwrap().estimate;
            let b = kfold_cv(&union, 2, &cfg(), &mut rng(seed), CvWeighting::Uniform).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn self_label_overestimates_tiny_labeled_sets() {
        // two well separated labels; plain CV has to use k = |labeled| = 2
        let task = TaskModel::default();
        let data = vec![LabeledSample::new(-1.5, 0, 1.0), LabeledSample::new(1.5, 1, 1.0)];
        let mut wins = 0;
        for seed in 0..50 {
            let pool = draw_unlabeled(&task, 100, &mut rng(1000 + seed));
            let sl = self_label_cv(&data, &pool, 3, &cfg(), &mut rng(seed)).unwrap().estimate.mean();
            let cv = kfold_cv(&data, 2, &cfg(), &mut rng(seed), CvWeighting::Uniform).unwrap().mean();
            if sl >= cv {
                wins += 1;
            }
        }
        assert!(wins >= 45, "{wins}");
    }

    #[test]
    fn more_folds_approach_the_full_model() {
        // averaged over datasets: mean |CV − truth| shrinks as training folds grow
        let task = TaskModel::default();
        let mut gaps = [0.0f64; 4];
        for set in 0..20u64 {
            let data = draw_labeled(&task, &SamplingDistribution::DataMarginal, 20, &mut rng(50 + set));
            let full = cfg().fit(data.clone()).unwrap();
            let truth = super::super::true_accuracy(&full, &task, 20_000, &mut rng(900 + set));
            for (slot, k) in [2usize, 5, 10, 20].iter().enumerate() {
                let mean = (0..10)
                    .map(|r| kfold_cv(&data, *k, &cfg(), &mut rng(set * 100 + r), CvWeighting::Uniform).unwrap().mean())
                    .sum::<f64>()
                    / 10.0;
                gaps[slot] += (mean - truth) / 20.0;
            }
        }
        // pessimistic bias shrinks toward zero with k
        assert!(gaps[0] < gaps[3], "{gaps:?}");
    }
}
