//! Pareto-front quality metrics: win rate, generational distance, inverted
//! generational distance, and preference-weighted evaluation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moop::ParetoFront;
use crate::oracle::Oracle;
use crate::rng::substream;

/// Nonnegative task preferences; normalized so the weights sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceVector {
    pub weights: Vec<f64>,
}

impl PreferenceVector {
    /// Builds and normalizes a preference vector.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "preference weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter(
                "preference weights must not all be zero".into(),
            ));
        }
        Ok(Self {
            weights: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Samples `k` decision vectors from a front's point set: without
/// replacement when the front has at least `k` points, with replacement
/// otherwise.
fn sample_front_points(
    front: &ParetoFront,
    k: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<usize> {
    let n = front.len();
    if n >= k {
        rand::seq::index::sample(rng, n, k).into_vec()
    } else {
        (0..k).map(|_| rng.gen_range(0..n)).collect()
    }
}

/// Fraction of strict pairwise wins of front `a` over front `b`.
///
/// Samples `k` decision vectors from each front, re-evaluates them on the
/// true oracle, and counts `1[a_in > b_jn]` over all `k^2 * N` comparisons.
/// Ties count as non-wins.
pub fn win_rate(
    front_a: &ParetoFront,
    front_b: &ParetoFront,
    oracle: &dyn Oracle,
    k: usize,
    seed: u64,
) -> Result<f64> {
    if front_a.is_empty() || front_b.is_empty() {
        return Err(Error::EmptyFront);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("win rate needs k >= 1".into()));
    }
    let n = oracle.task_count();
    let mut rng = substream(seed, "winrate");
    let picks_a = sample_front_points(front_a, k, &mut rng);
    let picks_b = sample_front_points(front_b, k, &mut rng);
    let metrics_a: Vec<Vec<f64>> = picks_a
        .iter()
        .map(|&i| oracle.evaluate(&front_a.points[i].c))
        .collect::<Result<_>>()?;
    let metrics_b: Vec<Vec<f64>> = picks_b
        .iter()
        .map(|&j| oracle.evaluate(&front_b.points[j].c))
        .collect::<Result<_>>()?;
    let mut wins = 0u64;
    for a in &metrics_a {
        for b in &metrics_b {
            for t in 0..n {
                if a[t] > b[t] {
                    wins += 1;
                }
            }
        }
    }
    Ok(wins as f64 / (k * k * n) as f64)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn min_distance(point: &[f64], set: &[Vec<f64>]) -> f64 {
    set.iter()
        .map(|other| euclidean(point, other))
        .fold(f64::INFINITY, f64::min)
}

fn power_mean_distance(from: &[Vec<f64>], to: &[Vec<f64>], p: f64) -> f64 {
    let k = from.len() as f64;
    let total: f64 = from.iter().map(|pt| min_distance(pt, to).powf(p)).sum();
    total.powf(1.0 / p) / k
}

fn objective_vectors(front: &ParetoFront) -> Vec<Vec<f64>> {
    front.points.iter().map(|p| p.f.clone()).collect()
}

fn check_fronts(front: &ParetoFront, reference: &ParetoFront) -> Result<()> {
    if front.is_empty() || reference.is_empty() {
        return Err(Error::EmptyFront);
    }
    if front.objective_dim() != reference.objective_dim() {
        return Err(Error::LengthMismatch {
            expected: reference.objective_dim(),
            got: front.objective_dim(),
        });
    }
    Ok(())
}

/// Generational distance `(1/K) * (sum_i d_i^p)^(1/p)` where `d_i` is the
/// minimal Euclidean distance from the i-th front point to the reference.
pub fn generational_distance(front: &ParetoFront, reference: &ParetoFront, p: f64) -> Result<f64> {
    check_fronts(front, reference)?;
    Ok(power_mean_distance(
        &objective_vectors(front),
        &objective_vectors(reference),
        p,
    ))
}

/// Inverted generational distance: generational distance with the roles of
/// the two fronts swapped, averaging over the reference points.
pub fn inverted_generational_distance(
    front: &ParetoFront,
    reference: &ParetoFront,
    p: f64,
) -> Result<f64> {
    check_fronts(front, reference)?;
    Ok(power_mean_distance(
        &objective_vectors(reference),
        &objective_vectors(front),
        p,
    ))
}

/// GD and IGD of `front` against `reference`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontDistances {
    pub gd: f64,
    pub igd: f64,
}

impl FrontDistances {
    pub fn total(&self) -> f64 {
        self.gd + self.igd
    }
}

/// GD/IGD with every objective affinely mapped to `[0, 1]` over the union
/// of both fronts' extremes, so magnitudes are comparable across metric
/// scales. Objectives with zero range across the union collapse to zero.
pub fn normalized_front_distances(
    front: &ParetoFront,
    reference: &ParetoFront,
    p: f64,
) -> Result<FrontDistances> {
    check_fronts(front, reference)?;
    let dim = front.objective_dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for point in front.points.iter().chain(&reference.points) {
        for (i, &v) in point.f.iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    let map = |f: &[f64]| -> Vec<f64> {
        f.iter()
            .enumerate()
            .map(|(i, &v)| {
                let range = hi[i] - lo[i];
                if range > 0.0 {
                    (v - lo[i]) / range
                } else {
                    0.0
                }
            })
            .collect()
    };
    let a: Vec<Vec<f64>> = front.points.iter().map(|pt| map(&pt.f)).collect();
    let b: Vec<Vec<f64>> = reference.points.iter().map(|pt| map(&pt.f)).collect();
    Ok(FrontDistances {
        gd: power_mean_distance(&a, &b, p),
        igd: power_mean_distance(&b, &a, p),
    })
}

/// Raw-space GD/IGD pair.
pub fn front_distances(front: &ParetoFront, reference: &ParetoFront, p: f64) -> Result<FrontDistances> {
    Ok(FrontDistances {
        gd: generational_distance(front, reference, p)?,
        igd: inverted_generational_distance(front, reference, p)?,
    })
}

/// Re-evaluates every front member on the true oracle and returns the member
/// maximizing the preference-weighted metric sum, with that sum. Ties break
/// toward the lowest front index.
pub fn preference_weighted_best(
    front: &ParetoFront,
    pref: &PreferenceVector,
    oracle: &dyn Oracle,
) -> Result<(Vec<f64>, f64)> {
    if front.is_empty() {
        return Err(Error::EmptyFront);
    }
    if pref.len() != oracle.task_count() {
        return Err(Error::LengthMismatch {
            expected: oracle.task_count(),
            got: pref.len(),
        });
    }
    let mut best: Option<(usize, f64)> = None;
    for (idx, point) in front.points.iter().enumerate() {
        let metrics = oracle.evaluate(&point.c)?;
        let value: f64 = metrics
            .iter()
            .zip(&pref.weights)
            .map(|(m, w)| m * w)
            .sum();
        if best.is_none_or(|(_, b)| value > b) {
            best = Some((idx, value));
        }
    }
    let (idx, value) = best.expect("front is nonempty");
    Ok((front.points[idx].c.clone(), value))
}
