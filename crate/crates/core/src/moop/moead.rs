//! MOEA/D baseline: Tchebycheff decomposition with neighborhood mating.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::genetic::{
    polynomial_mutation, random_point, sbx_crossover, MUTATION_ETA, SBX_ETA, SBX_RATE,
};
use super::refdirs::{das_dennis, reference_count};
use super::{non_dominated_filter, MoopRun, ObjectiveSpec, Provenance};
use crate::error::{Error, Result};

/// MOEA/D run parameters.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct MoeadParams {
    pub population: usize,
    pub generations: usize,
    /// Mating/replacement neighborhood size.
    pub neighborhood: usize,
    pub seed: u64,
}

impl MoeadParams {
    pub fn defaults_for(seed: u64) -> Self {
        Self {
            population: 50,
            generations: 20,
            neighborhood: 15,
            seed,
        }
    }
}

/// Tchebycheff scalarization `max_i w_i |f_i - z_i|` with a small weight
/// floor so zero-weight axes still pull toward the ideal point.
fn tchebycheff(f_min: &[f64], weight: &[f64], ideal: &[f64]) -> f64 {
    f_min
        .iter()
        .zip(weight)
        .zip(ideal)
        .map(|((&f, &w), &z)| w.max(1e-6) * (f - z).abs())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Decomposition-based search. Spends exactly `population` surrogate
/// evaluations for initialization plus one per subproblem per generation,
/// and returns the non-dominated archive of everything evaluated.
pub fn moead_front(spec: &ObjectiveSpec, params: &MoeadParams) -> Result<MoopRun> {
    if params.population < 2 {
        return Err(Error::InvalidParameter(
            "MOEA/D population must be at least 2".into(),
        ));
    }
    if params.neighborhood < 2 {
        return Err(Error::InvalidParameter(
            "MOEA/D neighborhood must be at least 2".into(),
        ));
    }
    let n_obj = spec.n_objectives();
    let weights = subproblem_weights(n_obj, params.population);
    let t = params.neighborhood.min(params.population);
    let neighborhoods = compute_neighborhoods(&weights, t);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut surrogate_evals = 0u64;
    let to_min = |f_raw: &[f64]| -> Vec<f64> {
        f_raw
            .iter()
            .zip(&spec.directions)
            .map(|(&v, d)| d.to_min_space(v))
            .collect()
    };

    let mut solutions: Vec<Vec<f64>> = Vec::with_capacity(params.population);
    let mut values_raw: Vec<Vec<f64>> = Vec::with_capacity(params.population);
    let mut values_min: Vec<Vec<f64>> = Vec::with_capacity(params.population);
    let mut archive: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut ideal = vec![f64::INFINITY; n_obj];

    for _ in 0..params.population {
        let c = random_point(&mut rng, &spec.bounds);
        let f_raw = spec.evaluate(&c);
        surrogate_evals += 1;
        let f_min = to_min(&f_raw);
        for (z, &f) in ideal.iter_mut().zip(&f_min) {
            *z = z.min(f);
        }
        archive.push((c.clone(), f_raw.clone()));
        solutions.push(c);
        values_raw.push(f_raw);
        values_min.push(f_min);
    }

    for _ in 0..params.generations {
        for nb in &neighborhoods {
            let a = nb[rng.gen_range(0..nb.len())];
            let b = nb[rng.gen_range(0..nb.len())];
            let (mut child, _) = sbx_crossover(
                &mut rng,
                &solutions[a],
                &solutions[b],
                &spec.bounds,
                SBX_ETA,
                SBX_RATE,
            );
            polynomial_mutation(
                &mut rng,
                &mut child,
                &spec.bounds,
                MUTATION_ETA,
                1.0 / spec.decision_dim() as f64,
            );
            let f_raw = spec.evaluate(&child);
            surrogate_evals += 1;
            let f_min = to_min(&f_raw);
            for (z, &f) in ideal.iter_mut().zip(&f_min) {
                *z = z.min(f);
            }
            archive.push((child.clone(), f_raw.clone()));
            for &k in nb {
                if tchebycheff(&f_min, &weights[k], &ideal)
                    < tchebycheff(&values_min[k], &weights[k], &ideal)
                {
                    solutions[k] = child.clone();
                    values_raw[k] = f_raw.clone();
                    values_min[k] = f_min.clone();
                }
            }
        }
    }

    let mut front = non_dominated_filter(&archive, &spec.directions)?;
    front.provenance = Provenance::Moead;
    Ok(MoopRun {
        front,
        surrogate_evals,
    })
}

/// One weight vector per subproblem: a Das-Dennis lattice fine enough to
/// cover the population, truncated to the population size.
fn subproblem_weights(n_obj: usize, population: usize) -> Vec<Vec<f64>> {
    if n_obj == 1 {
        return vec![vec![1.0]; population];
    }
    let mut partitions = 1;
    while reference_count(n_obj, partitions) < population {
        partitions += 1;
    }
    let mut weights = das_dennis(n_obj, partitions);
    weights.truncate(population);
    weights
}

/// Indices of the `t` nearest weight vectors (by Euclidean distance, with
/// index tie-break) for each subproblem.
fn compute_neighborhoods(weights: &[Vec<f64>], t: usize) -> Vec<Vec<usize>> {
    weights
        .iter()
        .map(|wi| {
            let mut by_distance: Vec<(usize, f64)> = weights
                .iter()
                .enumerate()
                .map(|(j, wj)| {
                    let d: f64 = wi
                        .iter()
                        .zip(wj)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (j, d)
                })
                .collect();
            by_distance.sort_by(|a, b| {
                a.1.partial_cmp(&b.1)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.0.cmp(&b.0))
            });
            by_distance.into_iter().take(t).map(|(j, _)| j).collect()
        })
        .collect()
}
