//! End-to-end amortized Pareto front estimation: sample scaling
//! coefficients, evaluate them on the true oracle, fit per-task surrogates,
//! search the surrogates, and optionally re-evaluate the resulting front.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moop::{nsga3_front, Direction, NsgaParams, ObjectiveSpec, ParetoFront, Provenance};
use crate::oracle::{MetricRange, Oracle, RecordStore};
use crate::rng::{derive_seed, substream};
use crate::surrogate::{
    fit_closed_form, fit_link, parameter_count, FitOptions, FitReport, SurrogateModel,
};

/// How the coefficient set is drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum SamplingScheme {
    /// Independent uniform draws inside the box.
    UniformBox,
    /// Latin hypercube: stratified uniform per coordinate.
    LatinHypercube,
    /// Caller-provided coefficient list, passed through unchanged.
    ProvidedList { coefficients: Vec<Vec<f64>> },
}

/// Evolutionary-search knobs carried by a run configuration; unset fields
/// fall back to the per-objective-count defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct MoopParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_partitions: Option<usize>,
}

impl MoopParams {
    pub fn resolve(&self, n_objectives: usize, seed: u64) -> NsgaParams {
        use crate::moop::refdirs::{partitions_within, reference_count};
        let mut params = NsgaParams::defaults_for(n_objectives, seed);
        match (self.reference_partitions, self.population) {
            (Some(partitions), Some(population)) => {
                params.reference_partitions = partitions;
                params.population = population;
            }
            (Some(partitions), None) => {
                params.reference_partitions = partitions;
                let refs = reference_count(n_objectives, partitions);
                params.population = refs.div_ceil(4) * 4;
            }
            (None, Some(population)) => {
                // Keep the reference set no larger than the population.
                params.reference_partitions = partitions_within(n_objectives, population);
                params.population = population;
            }
            (None, None) => {}
        }
        if let Some(g) = self.generations {
            params.generations = g;
        }
        params.seed = seed;
        params
    }
}

/// Configuration of one amortized-front run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapConfig {
    /// Number of coefficient vectors to evaluate for fitting.
    pub k_samples: usize,
    #[serde(default = "default_sampling")]
    pub sampling: SamplingScheme,
    /// Decision box, one (lower, upper) pair per coefficient.
    pub bounds: Vec<(f64, f64)>,
    /// Per-task metric range, which selects each task's link.
    pub links: Vec<MetricRange>,
    /// Per-task optimization direction.
    pub directions: Vec<Direction>,
    #[serde(default)]
    pub moop: MoopParams,
    pub seed: u64,
    /// Re-evaluate the predicted front on the true oracle ("real" front).
    #[serde(default = "default_true")]
    pub reevaluate_front: bool,
}

fn default_sampling() -> SamplingScheme {
    SamplingScheme::UniformBox
}

fn default_true() -> bool {
    true
}

impl MapConfig {
    /// Uniform-box configuration with per-task links/directions and defaults
    /// everywhere else.
    pub fn new(
        k_samples: usize,
        bounds: Vec<(f64, f64)>,
        links: Vec<MetricRange>,
        directions: Vec<Direction>,
        seed: u64,
    ) -> Self {
        Self {
            k_samples,
            sampling: SamplingScheme::UniformBox,
            bounds,
            links,
            directions,
            moop: MoopParams::default(),
            seed,
            reevaluate_front: true,
        }
    }

    pub fn validate(&self, n_tasks: usize) -> Result<()> {
        if self.links.len() != n_tasks {
            return Err(Error::LengthMismatch {
                expected: n_tasks,
                got: self.links.len(),
            });
        }
        if self.directions.len() != n_tasks {
            return Err(Error::LengthMismatch {
                expected: n_tasks,
                got: self.directions.len(),
            });
        }
        if self.bounds.len() != n_tasks {
            return Err(Error::LengthMismatch {
                expected: n_tasks,
                got: self.bounds.len(),
            });
        }
        for &(lo, hi) in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParameter(format!(
                    "box requires lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        let needed = parameter_count(n_tasks);
        if self.k_samples < needed {
            return Err(Error::InsufficientSamples {
                needed,
                got: self.k_samples,
            });
        }
        for link in &self.links {
            link.validate()?;
        }
        Ok(())
    }
}

/// Independent uniform draws inside the box, sample-major then
/// coordinate-major, so every caller shares the same draw order.
pub fn uniform_box_samples(
    bounds: &[(f64, f64)],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    (0..k)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
                .collect()
        })
        .collect()
}

/// Draws the coefficient set for fitting; deterministic under the seed.
pub fn sample_coefficients(config: &MapConfig, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let k = config.k_samples;
    let dim = config.bounds.len();
    match &config.sampling {
        SamplingScheme::ProvidedList { coefficients } => coefficients.clone(),
        SamplingScheme::UniformBox => uniform_box_samples(&config.bounds, k, rng),
        SamplingScheme::LatinHypercube => {
            let mut strata: Vec<Vec<usize>> = Vec::with_capacity(dim);
            for _ in 0..dim {
                let mut order: Vec<usize> = (0..k).collect();
                order.shuffle(rng);
                strata.push(order);
            }
            (0..k)
                .map(|i| {
                    (0..dim)
                        .map(|d| {
                            let (lo, hi) = config.bounds[d];
                            let cell = (strata[d][i] as f64 + rng.gen::<f64>()) / k as f64;
                            lo + (hi - lo) * cell
                        })
                        .collect()
                })
                .collect()
        }
    }
}

/// Everything a run produces: predicted and re-evaluated fronts, fitted
/// surrogates with diagnostics, the evaluation records, and the exact
/// oracle-call count.
#[derive(Debug, Clone)]
pub struct MapOutcome {
    pub front_predicted: ParetoFront,
    pub front_real: Option<ParetoFront>,
    pub surrogates: Vec<SurrogateModel>,
    pub fit_reports: Vec<FitReport>,
    pub records: RecordStore,
    pub eval_count: u64,
}

/// Fits one task's surrogate: closed form for unbounded metrics, iterative
/// linked fit otherwise.
pub fn fit_task(
    store: &RecordStore,
    task: usize,
    link: MetricRange,
) -> Result<(SurrogateModel, FitReport)> {
    match link {
        MetricRange::Unbounded => fit_closed_form(store, task),
        other => fit_link(store, task, other, &FitOptions::default()),
    }
}

/// Runs the full amortized-front pipeline against a true oracle.
pub fn run_map(config: &MapConfig, oracle: &dyn Oracle) -> Result<MapOutcome> {
    let n = oracle.task_count();
    config.validate(n)?;

    let mut sampling_rng = substream(config.seed, "sampling");
    let samples = sample_coefficients(config, &mut sampling_rng);
    oracle.check_budget(samples.len() as u64)?;

    let mut records = RecordStore::new(n);
    for c in samples {
        let metrics = oracle.evaluate(&c)?;
        records.add_evaluated(c, metrics)?;
    }
    let sample_evals = records.eval_count();

    let fits: Vec<Result<(SurrogateModel, FitReport)>> = (0..n)
        .into_par_iter()
        .map(|task| fit_task(&records, task, config.links[task]))
        .collect();
    let mut surrogates = Vec::with_capacity(n);
    let mut fit_reports = Vec::with_capacity(n);
    for fit in fits {
        let (model, report) = fit?;
        surrogates.push(model);
        fit_reports.push(report);
    }

    let front_predicted = amortized_front(
        &surrogates,
        &config.directions,
        &config.bounds,
        &config.moop,
        config.seed,
    )?;

    let mut eval_count = sample_evals;
    let front_real = if config.reevaluate_front {
        let real = reevaluate_front(&front_predicted, oracle)?;
        eval_count += real.len() as u64;
        Some(real)
    } else {
        None
    };

    Ok(MapOutcome {
        front_predicted,
        front_real,
        surrogates,
        fit_reports,
        records,
        eval_count,
    })
}

/// Amortized front from externally produced records: fits the surrogates
/// and runs the search without touching any oracle, so the evaluation cost
/// stays zero and no re-evaluated front is produced.
pub fn run_map_offline(config: &MapConfig, records: RecordStore) -> Result<MapOutcome> {
    let n = records.n_tasks();
    let mut offline = config.clone();
    offline.k_samples = records.len();
    offline.validate(n)?;

    let fits: Vec<Result<(SurrogateModel, FitReport)>> = (0..n)
        .into_par_iter()
        .map(|task| fit_task(&records, task, offline.links[task]))
        .collect();
    let mut surrogates = Vec::with_capacity(n);
    let mut fit_reports = Vec::with_capacity(n);
    for fit in fits {
        let (model, report) = fit?;
        surrogates.push(model);
        fit_reports.push(report);
    }
    let front_predicted = amortized_front(
        &surrogates,
        &offline.directions,
        &offline.bounds,
        &offline.moop,
        offline.seed,
    )?;
    Ok(MapOutcome {
        front_predicted,
        front_real: None,
        surrogates,
        fit_reports,
        records,
        eval_count: 0,
    })
}

/// Runs the evolutionary search over fitted surrogates; the search seed is
/// derived from the master seed's "moop" substream.
pub fn amortized_front(
    surrogates: &[SurrogateModel],
    directions: &[Direction],
    bounds: &[(f64, f64)],
    moop: &MoopParams,
    master_seed: u64,
) -> Result<ParetoFront> {
    let spec = ObjectiveSpec::new(surrogates.to_vec(), directions.to_vec(), bounds.to_vec())?;
    let moop_seed = u64::from_le_bytes(
        derive_seed(master_seed, "moop")[..8]
            .try_into()
            .expect("8 bytes"),
    );
    let params = moop.resolve(surrogates.len(), moop_seed);
    Ok(nsga3_front(&spec, &params)?.front)
}

/// Re-evaluates every front point on the true oracle, preserving order and
/// decision vectors.
pub fn reevaluate_front(front: &ParetoFront, oracle: &dyn Oracle) -> Result<ParetoFront> {
    oracle.check_budget(front.len() as u64)?;
    let mut points = Vec::with_capacity(front.len());
    for point in &front.points {
        let f = oracle.evaluate(&point.c)?;
        points.push(crate::moop::FrontPoint {
            c: point.c.clone(),
            f,
        });
    }
    Ok(ParetoFront {
        points,
        provenance: Provenance::Amortized,
    })
}
