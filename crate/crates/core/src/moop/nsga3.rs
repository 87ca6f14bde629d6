//! NSGA-III: reference-point based many-objective evolutionary search.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::genetic::{
    polynomial_mutation, random_point, sbx_crossover, MUTATION_ETA, SBX_ETA, SBX_RATE,
};
use super::refdirs::{das_dennis, default_partitions, reference_count};
use super::{non_dominated_filter, MoopRun, ObjectiveSpec, Provenance};
use crate::error::{Error, Result};

/// NSGA-III run parameters.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct NsgaParams {
    pub population: usize,
    pub generations: usize,
    /// Das-Dennis gaps per objective axis.
    pub reference_partitions: usize,
    pub seed: u64,
}

impl NsgaParams {
    /// Defaults: partitions capped so the reference count stays near 120,
    /// population the next multiple of 4 at or above the reference count,
    /// 200 generations.
    pub fn defaults_for(n_objectives: usize, seed: u64) -> Self {
        let reference_partitions = default_partitions(n_objectives);
        let refs = reference_count(n_objectives, reference_partitions);
        let population = refs.div_ceil(4) * 4;
        Self {
            population,
            generations: 200,
            reference_partitions,
            seed,
        }
    }
}

struct Individual {
    c: Vec<f64>,
    f_raw: Vec<f64>,
    f_min: Vec<f64>,
}

/// Runs NSGA-III on the surrogate objectives and returns the non-dominated
/// set of the final population, with objective values from the surrogates.
/// Deterministic under a fixed seed.
pub fn nsga3_front(spec: &ObjectiveSpec, params: &NsgaParams) -> Result<MoopRun> {
    let n_obj = spec.n_objectives();
    let refs = das_dennis(n_obj, params.reference_partitions);
    if params.population < refs.len() {
        return Err(Error::InvalidParameter(format!(
            "population {} smaller than reference count {}",
            params.population,
            refs.len()
        )));
    }
    if params.population < 2 || !params.population.is_multiple_of(2) {
        return Err(Error::InvalidParameter(
            "population must be even and at least 2".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut surrogate_evals = 0u64;
    let evaluate = |c: Vec<f64>, evals: &mut u64| {
        let f_raw = spec.evaluate(&c);
        let f_min: Vec<f64> = f_raw
            .iter()
            .zip(&spec.directions)
            .map(|(&v, d)| d.to_min_space(v))
            .collect();
        *evals += 1;
        Individual { c, f_raw, f_min }
    };

    let mut population: Vec<Individual> = (0..params.population)
        .map(|_| evaluate(random_point(&mut rng, &spec.bounds), &mut surrogate_evals))
        .collect();

    for _ in 0..params.generations {
        // Random parent pairing; survival pressure comes from the
        // environmental selection below.
        let mut order: Vec<usize> = (0..params.population).collect();
        order.shuffle(&mut rng);
        let mut offspring = Vec::with_capacity(params.population);
        for pair in order.chunks(2) {
            let (a, b) = (pair[0], pair[1 % pair.len()]);
            let (mut c1, mut c2) = sbx_crossover(
                &mut rng,
                &population[a].c,
                &population[b].c,
                &spec.bounds,
                SBX_ETA,
                SBX_RATE,
            );
            let mutation_rate = 1.0 / spec.decision_dim() as f64;
            polynomial_mutation(&mut rng, &mut c1, &spec.bounds, MUTATION_ETA, mutation_rate);
            polynomial_mutation(&mut rng, &mut c2, &spec.bounds, MUTATION_ETA, mutation_rate);
            offspring.push(evaluate(c1, &mut surrogate_evals));
            offspring.push(evaluate(c2, &mut surrogate_evals));
        }
        population.extend(offspring);
        population = environmental_selection(population, params.population, &refs, &mut rng);
    }

    let points: Vec<(Vec<f64>, Vec<f64>)> = population
        .iter()
        .map(|ind| (ind.c.clone(), ind.f_raw.clone()))
        .collect();
    let mut front = non_dominated_filter(&points, &spec.directions)?;
    front.provenance = Provenance::Amortized;
    Ok(MoopRun {
        front,
        surrogate_evals,
    })
}

/// Fast non-dominated sort (minimize-space); returns fronts of indices.
pub(super) fn non_dominated_sort(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if super::dominates_min(&points[i], &points[j]) {
                dominated_by[i].push(j);
                domination_count[j] += 1;
            } else if super::dominates_min(&points[j], &points[i]) {
                dominated_by[j].push(i);
                domination_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        fronts.push(std::mem::take(&mut current));
        current = next;
    }
    fronts
}

fn environmental_selection(
    combined: Vec<Individual>,
    target: usize,
    refs: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
) -> Vec<Individual> {
    let f_min: Vec<Vec<f64>> = combined.iter().map(|i| i.f_min.clone()).collect();
    let fronts = non_dominated_sort(&f_min);

    let mut selected: Vec<usize> = Vec::with_capacity(target);
    let mut last_front: Vec<usize> = Vec::new();
    for front in &fronts {
        if selected.len() + front.len() <= target {
            selected.extend_from_slice(front);
            if selected.len() == target {
                break;
            }
        } else {
            last_front = front.clone();
            break;
        }
    }

    if selected.len() < target && !last_front.is_empty() {
        let pool: Vec<usize> = selected.iter().chain(&last_front).copied().collect();
        let normalized = normalize_objectives(&f_min, &pool);
        // Association of every pool member with its nearest reference line.
        let assoc: Vec<(usize, f64)> = pool
            .iter()
            .enumerate()
            .map(|(pos, _)| nearest_reference(&normalized[pos], refs))
            .collect();
        let index_in_pool: std::collections::HashMap<usize, usize> =
            pool.iter().enumerate().map(|(pos, &i)| (i, pos)).collect();

        let mut niche_count = vec![0usize; refs.len()];
        for &i in &selected {
            niche_count[assoc[index_in_pool[&i]].0] += 1;
        }

        let mut remaining: Vec<usize> = last_front.clone();
        let mut active: Vec<bool> = vec![true; refs.len()];
        while selected.len() < target && !remaining.is_empty() {
            let min_count = (0..refs.len())
                .filter(|&j| active[j])
                .map(|j| niche_count[j])
                .min()
                .expect("at least one active reference");
            let ties: Vec<usize> = (0..refs.len())
                .filter(|&j| active[j] && niche_count[j] == min_count)
                .collect();
            let j = ties[rng.gen_range(0..ties.len())];
            let members: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| assoc[index_in_pool[&i]].0 == j)
                .collect();
            if members.is_empty() {
                active[j] = false;
                continue;
            }
            let chosen = if niche_count[j] == 0 {
                // Closest member to an unoccupied reference direction.
                *members
                    .iter()
                    .min_by(|&&a, &&b| {
                        assoc[index_in_pool[&a]]
                            .1
                            .partial_cmp(&assoc[index_in_pool[&b]].1)
                            .unwrap_or(std::cmp::Ordering::Equal)
                    })
                    .unwrap()
            } else {
                members[rng.gen_range(0..members.len())]
            };
            selected.push(chosen);
            niche_count[j] += 1;
            remaining.retain(|&i| i != chosen);
        }
    }

    let selected_set: std::collections::HashSet<usize> = selected.iter().copied().collect();
    combined
        .into_iter()
        .enumerate()
        .filter_map(|(i, ind)| selected_set.contains(&i).then_some(ind))
        .collect()
}

/// Translate by the ideal point and scale by intercepts of the hyperplane
/// through the per-objective extreme points (achievement scalarizing
/// selection); falls back to the per-objective maximum when degenerate.
fn normalize_objectives(f_min: &[Vec<f64>], pool: &[usize]) -> Vec<Vec<f64>> {
    let n_obj = f_min[pool[0]].len();
    let mut ideal = vec![f64::INFINITY; n_obj];
    for &i in pool {
        for j in 0..n_obj {
            ideal[j] = ideal[j].min(f_min[i][j]);
        }
    }
    let translated: Vec<Vec<f64>> = pool
        .iter()
        .map(|&i| (0..n_obj).map(|j| f_min[i][j] - ideal[j]).collect())
        .collect();

    let mut extremes = Vec::with_capacity(n_obj);
    for axis in 0..n_obj {
        let best = translated
            .iter()
            .min_by(|a, b| {
                asf(a, axis)
                    .partial_cmp(&asf(b, axis))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("pool is nonempty");
        extremes.push(best.clone());
    }

    let intercepts = hyperplane_intercepts(&extremes, n_obj).unwrap_or_else(|| {
        (0..n_obj)
            .map(|j| translated.iter().map(|t| t[j]).fold(0.0, f64::max))
            .collect()
    });
    let intercepts: Vec<f64> = intercepts
        .into_iter()
        .enumerate()
        .map(|(j, a)| {
            if a.is_finite() && a > 1e-12 {
                a
            } else {
                translated
                    .iter()
                    .map(|t| t[j])
                    .fold(0.0, f64::max)
                    .max(1e-12)
            }
        })
        .collect();

    translated
        .into_iter()
        .map(|t| t.iter().zip(&intercepts).map(|(v, a)| v / a).collect())
        .collect()
}

fn asf(point: &[f64], axis: usize) -> f64 {
    point
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = if i == axis { 1.0 } else { 1e-6 };
            v / w
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn hyperplane_intercepts(extremes: &[Vec<f64>], n_obj: usize) -> Option<Vec<f64>> {
    let matrix = DMatrix::from_fn(n_obj, n_obj, |r, c| extremes[r][c]);
    let rhs = DVector::from_element(n_obj, 1.0);
    let solution = matrix.lu().solve(&rhs)?;
    let mut intercepts = Vec::with_capacity(n_obj);
    for v in solution.iter() {
        if !v.is_finite() || v.abs() < 1e-12 {
            return None;
        }
        intercepts.push(1.0 / v);
    }
    Some(intercepts)
}

fn nearest_reference(point: &[f64], refs: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0usize, f64::INFINITY);
    for (j, r) in refs.iter().enumerate() {
        let r_norm_sq: f64 = r.iter().map(|v| v * v).sum();
        let proj: f64 = point.iter().zip(r).map(|(p, w)| p * w).sum::<f64>() / r_norm_sq;
        let dist_sq: f64 = point
            .iter()
            .zip(r)
            .map(|(p, w)| {
                let d = p - proj * w;
                d * d
            })
            .sum();
        if dist_sq < best.1 {
            best = (j, dist_sq);
        }
    }
    (best.0, best.1.sqrt())
}
