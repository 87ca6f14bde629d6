//! Bayesian adaptive sampling of scaling coefficients.
//!
//! Coefficient space is cut into angular bins (hyperspherical coordinates
//! over the nonnegative orthant, radius ignored). Each bin is scored by the
//! surrogate's squared error on the records it holds plus half a bootstrap
//! standard deviation of that error, an upper-confidence-bound rule: bins
//! where the surrogate is bad or uncertain attract the next round of
//! evaluations.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moop::Direction;
use crate::oracle::{MetricRange, Oracle, RecordStore};
use crate::pipeline::{
    amortized_front, fit_task, reevaluate_front, uniform_box_samples, MapOutcome, MoopParams,
};
use crate::rng::{indexed_substream, substream};
use crate::surrogate::{predict, r_squared, FitReport, SurrogateModel};

/// Angular-bin scores and the sampling distribution they induce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinPosterior {
    pub bins_per_axis: usize,
    pub n_tasks: usize,
    /// UCB score per flat bin (`mean + std/2` of the per-record loss).
    pub scores: Vec<f64>,
    /// Sampling probabilities: `max(score, 0) + eps`, normalized, with an
    /// exploration floor `eps = 0.01 / bin_count` keeping every bin
    /// reachable.
    pub probabilities: Vec<f64>,
}

impl BinPosterior {
    pub fn bin_count(&self) -> usize {
        self.scores.len()
    }
}

/// Total number of angular bins: `k^(N-1)`.
pub fn total_bins(n_tasks: usize, bins_per_axis: usize) -> usize {
    bins_per_axis.pow(n_tasks.saturating_sub(1) as u32)
}

/// Flat angular bin of a coefficient vector in the nonnegative orthant.
///
/// The `N-1` hyperspherical angles each lie in `[0, pi/2]` and are cut into
/// `k` equal intervals; the flat index is their mixed-radix combination
/// (first angle most significant). Radius is ignored, so `c` and `lambda*c`
/// share a bin for any `lambda > 0`.
pub fn angular_bin_index(c: &[f64], bins_per_axis: usize) -> Result<usize> {
    if bins_per_axis == 0 {
        return Err(Error::InvalidParameter("bins_per_axis must be >= 1".into()));
    }
    for (index, &value) in c.iter().enumerate() {
        if value < 0.0 {
            return Err(Error::NegativeCoordinate { index, value });
        }
    }
    if c.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let n = c.len();
    let width = FRAC_PI_2 / bins_per_axis as f64;
    let mut flat = 0usize;
    for i in 0..n.saturating_sub(1) {
        let tail: f64 = c[(i + 1)..].iter().map(|v| v * v).sum::<f64>().sqrt();
        let angle = tail.atan2(c[i]);
        let bin = ((angle / width) as usize).min(bins_per_axis - 1);
        flat = flat * bins_per_axis + bin;
    }
    Ok(flat)
}

/// Adaptive-sampling configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasmConfig {
    /// Adaptive rounds after the uniform round (`J`).
    pub iterations: usize,
    /// Uniform samples in round zero (`n_0`).
    pub initial_samples: usize,
    /// Samples per adaptive round (`n_j`).
    pub per_round_samples: usize,
    /// Angular bins per axis (`k`).
    pub bins_per_axis: usize,
    /// Bootstrap resamples per bin (`Q`).
    #[serde(default = "default_bootstrap_rounds")]
    pub bootstrap_rounds: usize,
    /// Fraction of a bin's records dropped per resample.
    #[serde(default = "default_drop_rate")]
    pub drop_rate: f64,
    /// Decision box; lower bounds must be zero so the angular wedges are
    /// anchored at the origin.
    pub bounds: Vec<(f64, f64)>,
    pub links: Vec<MetricRange>,
    pub directions: Vec<Direction>,
    #[serde(default)]
    pub moop: MoopParams,
    pub seed: u64,
    /// Re-evaluate the final front on the true oracle.
    #[serde(default)]
    pub reevaluate_front: bool,
}

fn default_bootstrap_rounds() -> usize {
    30
}

fn default_drop_rate() -> f64 {
    0.2
}

/// Default bins per axis: 6 for two tasks, 4 for three; 2 beyond that since
/// the bin count grows as `k^(N-1)`.
pub fn default_bins_per_axis(n_tasks: usize) -> usize {
    match n_tasks {
        0..=2 => 6,
        3 => 4,
        _ => 2,
    }
}

impl BasmConfig {
    pub fn validate(&self, n_tasks: usize) -> Result<()> {
        if self.bootstrap_rounds < 2 {
            return Err(Error::InvalidParameter(
                "bootstrap_rounds must be at least 2".into(),
            ));
        }
        if !(self.drop_rate > 0.0 && self.drop_rate < 1.0) {
            return Err(Error::InvalidParameter(
                "drop_rate must lie strictly between 0 and 1".into(),
            ));
        }
        if self.bins_per_axis == 0 {
            return Err(Error::InvalidParameter("bins_per_axis must be >= 1".into()));
        }
        if self.initial_samples == 0 || (self.iterations > 0 && self.per_round_samples == 0) {
            return Err(Error::InvalidParameter(
                "sample counts must be positive".into(),
            ));
        }
        if self.bounds.len() != n_tasks
            || self.links.len() != n_tasks
            || self.directions.len() != n_tasks
        {
            return Err(Error::LengthMismatch {
                expected: n_tasks,
                got: self.bounds.len(),
            });
        }
        for &(lo, hi) in &self.bounds {
            if lo != 0.0 || !(hi.is_finite() && hi > 0.0) {
                return Err(Error::InvalidParameter(
                    "adaptive sampling needs a [0, upper] box per coordinate".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Mean squared surrogate error of one record across tasks.
fn record_loss(record_c: &[f64], record_metrics: &[f64], surrogates: &[SurrogateModel]) -> f64 {
    let n = surrogates.len();
    let total: f64 = surrogates
        .iter()
        .zip(record_metrics)
        .map(|(model, &m)| {
            let d = predict(model, record_c) - m;
            d * d
        })
        .sum();
    total / n as f64
}

/// Scores every angular bin from the records it holds.
///
/// Per occupied bin: `mean` of the per-record squared surrogate error, and
/// a bootstrap `std` from `bootstrap_rounds` resamples that each drop
/// `ceil(drop_rate * count)` records (capped so at least one survives).
/// Empty bins inherit the maximum occupied score, keeping unexplored
/// regions attractive.
pub fn bootstrap_bin_scores(
    store: &RecordStore,
    surrogates: &[SurrogateModel],
    bins_per_axis: usize,
    bootstrap_rounds: usize,
    drop_rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<BinPosterior> {
    if store.is_empty() {
        return Err(Error::EmptyStore);
    }
    let n = store.n_tasks();
    let bin_count = total_bins(n, bins_per_axis);
    let mut bin_losses: Vec<Vec<f64>> = vec![Vec::new(); bin_count];
    for record in store.records() {
        let bin = angular_bin_index(&record.c, bins_per_axis)?;
        bin_losses[bin].push(record_loss(&record.c, &record.metrics, surrogates));
    }

    let mut scores = vec![f64::NAN; bin_count];
    let mut max_occupied = 0.0f64;
    for (bin, losses) in bin_losses.iter().enumerate() {
        if losses.is_empty() {
            continue;
        }
        let count = losses.len();
        let mean: f64 = losses.iter().sum::<f64>() / count as f64;
        let std = if count < 2 {
            0.0
        } else {
            let drop = ((drop_rate * count as f64).ceil() as usize).clamp(1, count - 1);
            let mut resample_means = Vec::with_capacity(bootstrap_rounds);
            for _ in 0..bootstrap_rounds {
                let kept = rand::seq::index::sample(rng, count, count - drop);
                let sum: f64 = kept.iter().map(|i| losses[i]).sum();
                resample_means.push(sum / (count - drop) as f64);
            }
            let m = resample_means.iter().sum::<f64>() / bootstrap_rounds as f64;
            (resample_means.iter().map(|l| (l - m) * (l - m)).sum::<f64>()
                / bootstrap_rounds as f64)
                .sqrt()
        };
        let score = mean + 0.5 * std;
        scores[bin] = score;
        max_occupied = max_occupied.max(score);
    }
    for score in scores.iter_mut() {
        if score.is_nan() {
            *score = max_occupied;
        }
    }

    let floor = 0.01 / bin_count as f64;
    let raw: Vec<f64> = scores.iter().map(|s| s.max(0.0) + floor).collect();
    let total: f64 = raw.iter().sum();
    let probabilities = raw.into_iter().map(|p| p / total).collect();
    Ok(BinPosterior {
        bins_per_axis,
        n_tasks: n,
        scores,
        probabilities,
    })
}

/// Direction unit vector for hyperspherical angles over the nonnegative
/// orthant.
fn unit_vector_from_angles(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut u = Vec::with_capacity(n);
    let mut sin_product = 1.0;
    for &angle in angles {
        u.push(sin_product * angle.cos());
        sin_product *= angle.sin();
    }
    u.push(sin_product);
    debug_assert_eq!(u.len(), n);
    u
}

/// Draws `n` coefficient vectors from the posterior: a bin per the bin
/// probabilities, angles uniform inside the bin's wedge (with a hair of
/// interior margin so reconstruction cannot cross the bin edge), and radius
/// uniform over the segment of the ray inside the box. Boxes are assumed
/// origin-anchored (`lower = 0` per coordinate, as `BasmConfig` enforces).
pub fn posterior_sample(
    posterior: &BinPosterior,
    n_samples: usize,
    bounds: &[(f64, f64)],
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let k = posterior.bins_per_axis;
    let n = posterior.n_tasks;
    let width = FRAC_PI_2 / k as f64;
    let margin = 1e-9 * width;
    (0..n_samples)
        .map(|_| {
            // Inverse-CDF draw over bins.
            let target: f64 = rng.gen();
            let mut acc = 0.0;
            let mut flat = posterior.probabilities.len() - 1;
            for (idx, &p) in posterior.probabilities.iter().enumerate() {
                acc += p;
                if target < acc {
                    flat = idx;
                    break;
                }
            }
            // Flat index back to per-axis bins (first angle most
            // significant), then uniform angles inside the wedge.
            let mut axis_bins = vec![0usize; n.saturating_sub(1)];
            let mut rest = flat;
            for slot in axis_bins.iter_mut().rev() {
                *slot = rest % k;
                rest /= k;
            }
            let angles: Vec<f64> = axis_bins
                .iter()
                .map(|&bin| {
                    let lo = bin as f64 * width + margin;
                    let hi = (bin + 1) as f64 * width - margin;
                    lo + (hi - lo) * rng.gen::<f64>()
                })
                .collect();
            let u = unit_vector_from_angles(&angles);
            let r_max = u
                .iter()
                .zip(bounds)
                .filter(|(ui, _)| **ui > 1e-12)
                .map(|(ui, &(_, hi))| hi / ui)
                .fold(f64::INFINITY, f64::min);
            let r_max = if r_max.is_finite() { r_max } else { 1.0 };
            let r = r_max * (1.0 - rng.gen::<f64>()) * (1.0 - 1e-12);
            u.into_iter().map(|ui| ui * r).collect()
        })
        .collect()
}

/// Per-round diagnostics: what was sampled, how well the surrogates fit,
/// and the bin state driving the next round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasmRound {
    pub round: usize,
    pub sampled: Vec<Vec<f64>>,
    pub r_squared: Vec<f64>,
    pub bin_scores: Vec<f64>,
    pub bin_probabilities: Vec<f64>,
}

/// Adaptive-run result: the same artifact set as a plain run plus per-round
/// diagnostics.
#[derive(Debug, Clone)]
pub struct BasmOutcome {
    pub map: MapOutcome,
    pub rounds: Vec<BasmRound>,
}

/// Runs Bayesian-adaptive surrogate fitting: a uniform round, `J` adaptive
/// rounds steered by the bin posterior, then the evolutionary search on the
/// final surrogates. With `iterations = 0` this reduces exactly to the
/// plain pipeline with `k = initial_samples`.
pub fn run_bayesian_map(config: &BasmConfig, oracle: &dyn Oracle) -> Result<BasmOutcome> {
    let n = oracle.task_count();
    config.validate(n)?;

    let mut records = RecordStore::new(n);
    let mut rounds = Vec::with_capacity(config.iterations + 1);
    let mut surrogates: Vec<SurrogateModel> = Vec::new();
    let mut fit_reports: Vec<FitReport> = Vec::new();

    let mut sampling_rng = substream(config.seed, "sampling");
    let mut next_posterior: Option<BinPosterior> = None;
    for round in 0..=config.iterations {
        let sampled = if round == 0 {
            uniform_box_samples(&config.bounds, config.initial_samples, &mut sampling_rng)
        } else {
            let posterior = next_posterior.take().expect("scored in the prior round");
            let mut posterior_rng = indexed_substream(config.seed, "posterior", round as u64);
            posterior_sample(
                &posterior,
                config.per_round_samples,
                &config.bounds,
                &mut posterior_rng,
            )
        };
        oracle.check_budget(sampled.len() as u64)?;
        for c in &sampled {
            let metrics = oracle.evaluate(c)?;
            records.add_evaluated(c.clone(), metrics)?;
        }

        surrogates.clear();
        fit_reports.clear();
        for task in 0..n {
            let (model, report) = fit_task(&records, task, config.links[task])?;
            surrogates.push(model);
            fit_reports.push(report);
        }

        // Score the bins once per round; the same posterior both goes into
        // the diagnostics and drives the next round's sampling.
        let mut bootstrap_rng = indexed_substream(config.seed, "bootstrap", round as u64 + 1);
        let posterior = bootstrap_bin_scores(
            &records,
            &surrogates,
            config.bins_per_axis,
            config.bootstrap_rounds,
            config.drop_rate,
            &mut bootstrap_rng,
        )?;
        let r2: Vec<f64> = (0..n)
            .map(|task| r_squared(&surrogates[task], &records, task))
            .collect::<Result<_>>()?;
        rounds.push(BasmRound {
            round,
            sampled,
            r_squared: r2,
            bin_scores: posterior.scores.clone(),
            bin_probabilities: posterior.probabilities.clone(),
        });
        next_posterior = Some(posterior);
    }

    let front_predicted = amortized_front(
        &surrogates,
        &config.directions,
        &config.bounds,
        &config.moop,
        config.seed,
    )?;
    let mut eval_count = records.eval_count();
    let front_real = if config.reevaluate_front {
        let real = reevaluate_front(&front_predicted, oracle)?;
        eval_count += real.len() as u64;
        Some(real)
    } else {
        None
    };

    Ok(BasmOutcome {
        map: MapOutcome {
            front_predicted,
            front_real,
            surrogates,
            fit_reports,
            records,
            eval_count,
        },
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{SyntheticLandscape, SyntheticOracle, TaskLandscape};
    use crate::pipeline::{run_map, MapConfig};

    #[test]
    fn bin_index_two_tasks_three_bins() {
        assert_eq!(angular_bin_index(&[1.0, 0.0], 3).unwrap(), 0);
        assert_eq!(angular_bin_index(&[0.0, 1.0], 3).unwrap(), 2);
        assert_eq!(angular_bin_index(&[1.0, 1.0], 3).unwrap(), 1);
    }

    #[test]
    fn bin_index_is_scale_invariant() {
        let mut rng = substream(9, "bins");
        for _ in 0..200 {
            let c: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
            if c.iter().all(|&v| v == 0.0) {
                continue;
            }
            let base = angular_bin_index(&c, 4).unwrap();
            for lambda in [0.5, 2.0, 17.0] {
                let scaled: Vec<f64> = c.iter().map(|v| v * lambda).collect();
                assert_eq!(angular_bin_index(&scaled, 4).unwrap(), base);
            }
        }
    }

    #[test]
    fn bin_index_three_tasks_axis_corners() {
        assert_eq!(total_bins(3, 2), 4);
        let bins: Vec<usize> = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]
        .iter()
        .map(|c| angular_bin_index(c, 2).unwrap())
        .collect();
        assert_eq!(bins[0], 0);
        assert_eq!(bins[1], 2);
        assert_eq!(bins[2], 3);
        assert_eq!(bins.iter().collect::<std::collections::BTreeSet<_>>().len(), 3);
    }

    #[test]
    fn bin_index_rejects_bad_input() {
        assert!(matches!(
            angular_bin_index(&[0.0, 0.0], 3),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(
            angular_bin_index(&[0.5, -0.1], 3),
            Err(Error::NegativeCoordinate { index: 1, .. })
        ));
    }

    fn flat_surrogate(n: usize, value: f64) -> SurrogateModel {
        SurrogateModel {
            n_tasks: n,
            link: MetricRange::Unbounded,
            a_upper: vec![0.0; n * (n + 1) / 2],
            b: vec![0.0; n],
            e: value,
        }
    }

    #[test]
    fn equal_residuals_give_zero_std() {
        let mut store = RecordStore::new(2);
        // All residuals are exactly 1 (surrogate predicts 0, metric 1).
        for i in 0..6 {
            let c = vec![1.0, 0.1 + 0.1 * i as f64];
            store.add_ingested(c, vec![1.0, 1.0]).unwrap();
        }
        let surrogates = vec![flat_surrogate(2, 0.0), flat_surrogate(2, 0.0)];
        let mut rng = substream(0, "bootstrap");
        let posterior =
            bootstrap_bin_scores(&store, &surrogates, 6, 30, 0.2, &mut rng).unwrap();
        let occupied: Vec<usize> = (0..posterior.bin_count())
            .filter(|&b| {
                store
                    .records()
                    .iter()
                    .any(|r| angular_bin_index(&r.c, 6).unwrap() == b)
            })
            .collect();
        for &b in &occupied {
            assert!((posterior.scores[b] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_surrogate_gives_uniform_probabilities() {
        let mut store = RecordStore::new(2);
        for i in 0..8 {
            let angle = 0.1 + i as f64 * 0.17;
            let c = vec![angle.cos().abs(), angle.sin().abs()];
            store.add_ingested(c, vec![0.5, 0.5]).unwrap();
        }
        let surrogates = vec![flat_surrogate(2, 0.5), flat_surrogate(2, 0.5)];
        let mut rng = substream(1, "bootstrap");
        let posterior =
            bootstrap_bin_scores(&store, &surrogates, 6, 30, 0.2, &mut rng).unwrap();
        let expected = 1.0 / posterior.bin_count() as f64;
        for &p in &posterior.probabilities {
            assert!((p - expected).abs() < 1e-12);
        }
        let sum: f64 = posterior.probabilities.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_std_matches_exhaustive_drop_subsets() {
        // Two bins; the interesting bin holds 5 records with distinct
        // residuals, so dropping 1 of 5 has exactly 5 equally likely
        // outcomes whose spread an exhaustive oracle can compute.
        let mut store = RecordStore::new(2);
        let residuals: [f64; 5] = [0.1, 0.3, 0.45, 0.7, 0.95];
        for (i, &r) in residuals.iter().enumerate() {
            // Angle near 0 keeps all five in the first of two bins.
            let c = vec![1.0, 0.01 + 0.01 * i as f64];
            store.add_ingested(c, vec![r.sqrt(), 0.0]).unwrap();
        }
        store.add_ingested(vec![0.01, 1.0], vec![0.0, 0.0]).unwrap();
        let surrogates = vec![flat_surrogate(2, 0.0), flat_surrogate(2, 0.0)];
        // Per-record loss over both tasks is residual^2 / 2 = r / 2.
        let losses: Vec<f64> = residuals.iter().map(|r| r / 2.0).collect();
        let subset_means: Vec<f64> = (0..5)
            .map(|dropped| {
                losses
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != dropped)
                    .map(|(_, l)| l)
                    .sum::<f64>()
                    / 4.0
            })
            .collect();
        let mean_of_means = subset_means.iter().sum::<f64>() / 5.0;
        let exact_std = (subset_means
            .iter()
            .map(|m| (m - mean_of_means) * (m - mean_of_means))
            .sum::<f64>()
            / 5.0)
            .sqrt();

        // High Q drives the sampled std toward the exhaustive value.
        let mut rng = substream(2, "bootstrap");
        let posterior =
            bootstrap_bin_scores(&store, &surrogates, 2, 4000, 0.2, &mut rng).unwrap();
        let bin = angular_bin_index(&[1.0, 0.01], 2).unwrap();
        let mean = losses.iter().sum::<f64>() / 5.0;
        let sampled_std = 2.0 * (posterior.scores[bin] - mean);
        assert!(
            (sampled_std - exact_std).abs() / exact_std < 0.05,
            "sampled std {sampled_std} vs exact {exact_std}"
        );
    }

    #[test]
    fn posterior_samples_stay_in_claimed_bins() {
        let posterior = BinPosterior {
            bins_per_axis: 6,
            n_tasks: 2,
            scores: vec![0.0; 6],
            probabilities: vec![1.0 / 6.0; 6],
        };
        let bounds = vec![(0.0, 1.0); 2];
        let mut rng = substream(3, "posterior");
        let samples = posterior_sample(&posterior, 500, &bounds, &mut rng);
        for c in &samples {
            assert!(c.iter().all(|&v| (0.0..=1.0).contains(&v)));
            // Reconstructing the bin from the sample must be consistent.
            angular_bin_index(c, 6).unwrap();
        }
    }

    #[test]
    fn degenerate_posterior_concentrates_samples() {
        let posterior = {
            let scores = vec![0.0, 10.0, 0.0];
            let floor = 0.01 / 3.0;
            let raw: Vec<f64> = scores.iter().map(|s: &f64| s.max(0.0) + floor).collect();
            let total: f64 = raw.iter().sum();
            BinPosterior {
                bins_per_axis: 3,
                n_tasks: 2,
                scores,
                probabilities: raw.into_iter().map(|p| p / total).collect(),
            }
        };
        let bounds = vec![(0.0, 1.0); 2];
        let mut rng = substream(4, "posterior");
        let samples = posterior_sample(&posterior, 300, &bounds, &mut rng);
        let in_hot_bin = samples
            .iter()
            .filter(|c| angular_bin_index(c, 3).unwrap() == 1)
            .count();
        assert!(in_hot_bin >= 295, "only {in_hot_bin}/300 in the hot bin");
    }

    #[test]
    fn uniform_scores_give_uniform_bin_frequencies() {
        let posterior = BinPosterior {
            bins_per_axis: 6,
            n_tasks: 2,
            scores: vec![0.5; 6],
            probabilities: vec![1.0 / 6.0; 6],
        };
        let bounds = vec![(0.0, 1.0); 2];
        let mut rng = substream(5, "posterior");
        let n = 10_000usize;
        let samples = posterior_sample(&posterior, n, &bounds, &mut rng);
        let mut counts = vec![0usize; 6];
        for c in &samples {
            counts[angular_bin_index(c, 6).unwrap()] += 1;
        }
        let expected = n as f64 / 6.0;
        let sigma = (n as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for &count in &counts {
            assert!(
                (count as f64 - expected).abs() <= 3.0 * sigma,
                "bin count {count} vs expected {expected}"
            );
        }
    }

    // With all scores forced equal, adaptive sampling degenerates to the
    // uniform-over-bins strategy of round zero; a chi-square test against
    // the uniform bin distribution must not reject it.
    #[test]
    fn forced_equal_scores_sample_bins_uniformly_chi_square() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let bins = 6usize;
        let posterior = BinPosterior {
            bins_per_axis: bins,
            n_tasks: 2,
            scores: vec![0.25; bins],
            probabilities: vec![1.0 / bins as f64; bins],
        };
        let bounds = vec![(0.0, 1.0); 2];
        let mut rng = substream(6, "posterior");
        let n = 10_000usize;
        let samples = posterior_sample(&posterior, n, &bounds, &mut rng);
        let mut counts = vec![0usize; bins];
        for c in &samples {
            counts[angular_bin_index(c, bins).unwrap()] += 1;
        }
        let expected = n as f64 / bins as f64;
        let statistic: f64 = counts
            .iter()
            .map(|&o| {
                let d = o as f64 - expected;
                d * d / expected
            })
            .sum();
        let chi = ChiSquared::new((bins - 1) as f64).unwrap();
        let p_value = 1.0 - chi.cdf(statistic);
        assert!(
            p_value > 0.01,
            "chi-square statistic {statistic:.2}, p-value {p_value:.4}"
        );
    }

    fn bounded_landscape() -> SyntheticLandscape {
        SyntheticLandscape {
            tasks: vec![
                TaskLandscape {
                    a: vec![vec![-3.0, 0.0], vec![0.0, -1.0]],
                    b: vec![3.0, 0.2],
                    e: -0.5,
                    link: MetricRange::Bounded {
                        lower: 0.0,
                        upper: 1.0,
                    },
                },
                TaskLandscape {
                    a: vec![vec![-1.0, 0.0], vec![0.0, -3.0]],
                    b: vec![0.2, 3.0],
                    e: -0.5,
                    link: MetricRange::Bounded {
                        lower: 0.0,
                        upper: 1.0,
                    },
                },
            ],
            cubic_gamma: 0.3,
            noise_sigma: 0.0,
        }
    }

    #[test]
    fn zero_iterations_reduces_to_plain_run() {
        let landscape = bounded_landscape();
        let basm_config = BasmConfig {
            iterations: 0,
            initial_samples: 12,
            per_round_samples: 3,
            bins_per_axis: 6,
            bootstrap_rounds: 30,
            drop_rate: 0.2,
            bounds: vec![(0.0, 1.0); 2],
            links: vec![
                MetricRange::Bounded {
                    lower: 0.0,
                    upper: 1.0,
                };
                2
            ],
            directions: vec![Direction::Maximize; 2],
            moop: MoopParams {
                population: Some(24),
                generations: Some(30),
                reference_partitions: Some(6),
            },
            seed: 88,
            reevaluate_front: false,
        };
        let oracle_a = SyntheticOracle::new(landscape.clone(), 7).unwrap();
        let basm = run_bayesian_map(&basm_config, &oracle_a).unwrap();

        let map_config = MapConfig {
            moop: basm_config.moop,
            reevaluate_front: false,
            ..MapConfig::new(
                12,
                basm_config.bounds.clone(),
                basm_config.links.clone(),
                basm_config.directions.clone(),
                88,
            )
        };
        let oracle_b = SyntheticOracle::new(landscape, 7).unwrap();
        let plain = run_map(&map_config, &oracle_b).unwrap();

        assert_eq!(basm.map.front_predicted, plain.front_predicted);
        assert_eq!(basm.map.surrogates, plain.surrogates);
        assert_eq!(basm.map.records.records(), plain.records.records());
        assert_eq!(basm.map.eval_count, plain.eval_count);
    }

    #[test]
    fn buffer_and_budget_accounting() {
        let oracle = SyntheticOracle::new(bounded_landscape(), 1).unwrap();
        let config = BasmConfig {
            iterations: 2,
            initial_samples: 8,
            per_round_samples: 3,
            bins_per_axis: 6,
            bootstrap_rounds: 10,
            drop_rate: 0.2,
            bounds: vec![(0.0, 1.0); 2],
            links: vec![
                MetricRange::Bounded {
                    lower: 0.0,
                    upper: 1.0,
                };
                2
            ],
            directions: vec![Direction::Maximize; 2],
            moop: MoopParams {
                population: Some(24),
                generations: Some(20),
                reference_partitions: Some(6),
            },
            seed: 3,
            reevaluate_front: false,
        };
        let outcome = run_bayesian_map(&config, &oracle).unwrap();
        assert_eq!(outcome.map.records.len(), 8 + 3 + 3);
        assert_eq!(outcome.map.eval_count, 14);
        assert_eq!(oracle.eval_count(), 14);
        assert_eq!(outcome.rounds.len(), 3);
        for round in &outcome.rounds {
            let p_sum: f64 = round.bin_probabilities.iter().sum();
            assert!((p_sum - 1.0).abs() < 1e-12);
            assert!(round.bin_probabilities.iter().all(|&p| p > 0.0));
        }
    }
}
