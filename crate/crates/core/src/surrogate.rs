//! Quadratic surrogate models of the evaluation metrics.
//!
//! Each task's metric is approximated by `0.5 c'Ac + b'c + e` pushed through
//! the task's link (identity for unbounded metrics, sigmoid for bounded,
//! softplus for lower-bounded). Unbounded fits have a closed-form ordinary
//! least squares solution over an expanded design row; linked fits run
//! full-batch gradient descent with a backtracking line search.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{MetricRange, RecordStore};

/// Number of regression parameters for `n` tasks: squares, interactions,
/// linear terms, and the constant.
pub fn parameter_count(n_tasks: usize) -> usize {
    n_tasks * (n_tasks + 3) / 2 + 1
}

/// Expanded predictor row for one coefficient vector, in the fixed order
/// `c_1^2..c_N^2, c_1 c_2 .. c_{N-1} c_N (i < j), c_1..c_N, 1`.
pub fn build_design_row(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut row = Vec::with_capacity(parameter_count(n));
    for &value in c {
        row.push(value * value);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            row.push(c[i] * c[j]);
        }
    }
    row.extend_from_slice(c);
    row.push(1.0);
    row
}

/// Fitted quadratic surrogate for one task. The quadratic matrix is stored
/// as its upper triangle (row-major, diagonal included), so symmetry holds
/// exactly by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    #[serde(rename = "N")]
    pub n_tasks: usize,
    pub link: MetricRange,
    #[serde(rename = "A_upper_triangle")]
    pub a_upper: Vec<f64>,
    pub b: Vec<f64>,
    pub e: f64,
}

fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * n - i * (i + 1) / 2 + j
}

impl SurrogateModel {
    /// Entry `A[i][j]` of the symmetric quadratic matrix.
    pub fn a(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.a_upper[upper_index(self.n_tasks, i, j)]
    }

    /// Full symmetric quadratic matrix.
    pub fn a_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.n_tasks;
        (0..n)
            .map(|i| (0..n).map(|j| self.a(i, j)).collect())
            .collect()
    }

    /// Quadratic value `0.5 c'Ac + b'c + e` before the link.
    pub fn quadratic(&self, c: &[f64]) -> f64 {
        let n = self.n_tasks;
        let mut q = self.e;
        for i in 0..n {
            q += self.b[i] * c[i];
            q += 0.5 * self.a(i, i) * c[i] * c[i];
            for j in (i + 1)..n {
                q += self.a(i, j) * c[i] * c[j];
            }
        }
        q
    }

    /// Builds a model from regression coefficients in design-row order.
    /// Diagonal quadratic entries are twice the fitted square coefficients;
    /// off-diagonal entries equal the fitted interaction coefficients.
    pub fn from_regression(beta: &[f64], n_tasks: usize, link: MetricRange) -> Self {
        assert_eq!(beta.len(), parameter_count(n_tasks));
        let n = n_tasks;
        let mut a_upper = vec![0.0; n * (n + 1) / 2];
        for i in 0..n {
            a_upper[upper_index(n, i, i)] = 2.0 * beta[i];
        }
        let mut k = n;
        for i in 0..n {
            for j in (i + 1)..n {
                a_upper[upper_index(n, i, j)] = beta[k];
                k += 1;
            }
        }
        let b = beta[k..k + n].to_vec();
        let e = beta[k + n];
        Self {
            n_tasks,
            link,
            a_upper,
            b,
            e,
        }
    }

    /// Regression coefficients in design-row order (inverse of
    /// [`SurrogateModel::from_regression`]).
    pub fn to_regression(&self) -> Vec<f64> {
        let n = self.n_tasks;
        let mut beta = Vec::with_capacity(parameter_count(n));
        for i in 0..n {
            beta.push(0.5 * self.a(i, i));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                beta.push(self.a(i, j));
            }
        }
        beta.extend_from_slice(&self.b);
        beta.push(self.e);
        beta
    }
}

/// Predicted metric value under the model's link.
pub fn predict(model: &SurrogateModel, c: &[f64]) -> f64 {
    model.link.apply(model.quadratic(c))
}

/// Fit diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub r_squared: f64,
    pub residual_mse: f64,
    /// Set when the normal equations were ill-conditioned and a small ridge
    /// term was added.
    pub condition_warning: bool,
    /// False when gradient descent hit the iteration cap before meeting the
    /// convergence criterion; the returned model is the best found.
    pub converged: bool,
}

/// Options for the iterative linked fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Converged when the relative MSE improvement over this many
    /// iterations drops below `relative_tolerance`.
    pub convergence_window: usize,
    pub relative_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            convergence_window: 50,
            relative_tolerance: 1e-10,
        }
    }
}

const CONDITION_LIMIT: f64 = 1e12;

/// Closed-form OLS fit of an unbounded (identity-link) surrogate:
/// `beta = (C'C)^-1 C'y` over the expanded design rows. Ill-conditioned
/// normal equations fall back to a small ridge with a warning.
pub fn fit_closed_form(store: &RecordStore, task: usize) -> Result<(SurrogateModel, FitReport)> {
    let n = store.n_tasks();
    let dim = parameter_count(n);
    let k = store.len();
    if k < dim {
        return Err(Error::InsufficientSamples { needed: dim, got: k });
    }
    let design = DMatrix::from_fn(k, dim, |r, c| build_design_row(&store.records()[r].c)[c]);
    let y = DVector::from_iterator(k, store.records().iter().map(|r| r.metrics[task]));

    let normal = design.transpose() * &design;
    let rhs = design.transpose() * y;

    let svd = normal.clone().svd(false, false);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };

    let mut condition_warning = false;
    let mut system = normal;
    if condition > CONDITION_LIMIT {
        condition_warning = true;
        let lambda = 1e-8 * system.trace() / dim as f64;
        for i in 0..dim {
            system[(i, i)] += lambda;
        }
    }

    let beta = match system.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => system.lu().solve(&rhs).ok_or(Error::SingularDesign)?,
    };
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularDesign);
    }

    let model = SurrogateModel::from_regression(beta.as_slice(), n, MetricRange::Unbounded);
    let report = report_for(&model, store, task, condition_warning, true)?;
    Ok((model, report))
}

/// Mean squared error of the linked prediction for regression parameters
/// `beta` over precomputed design rows and targets.
pub fn link_mse(beta: &[f64], rows: &[Vec<f64>], targets: &[f64], link: MetricRange) -> f64 {
    let k = rows.len();
    let mut total = 0.0;
    for (row, &y) in rows.iter().zip(targets) {
        let q = dot(beta, row);
        let r = link.apply(q) - y;
        total += r * r;
    }
    total / k as f64
}

/// Analytic gradient of [`link_mse`] with respect to `beta`.
pub fn link_mse_gradient(
    beta: &[f64],
    rows: &[Vec<f64>],
    targets: &[f64],
    link: MetricRange,
) -> Vec<f64> {
    let k = rows.len();
    let mut grad = vec![0.0; beta.len()];
    for (row, &y) in rows.iter().zip(targets) {
        let q = dot(beta, row);
        let scale = 2.0 * (link.apply(q) - y) * link.derivative(q) / k as f64;
        for (g, &x) in grad.iter_mut().zip(row) {
            *g += scale * x;
        }
    }
    grad
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Iterative fit of a linked surrogate by full-batch gradient descent with
/// backtracking line search, started at the best constant model. Hitting the
/// iteration cap returns the best parameters found with `converged = false`.
pub fn fit_link(
    store: &RecordStore,
    task: usize,
    link: MetricRange,
    opts: &FitOptions,
) -> Result<(SurrogateModel, FitReport)> {
    link.validate()?;
    let n = store.n_tasks();
    let dim = parameter_count(n);
    let k = store.len();
    if k < dim {
        return Err(Error::InsufficientSamples { needed: dim, got: k });
    }
    let rows: Vec<Vec<f64>> = store.records().iter().map(|r| build_design_row(&r.c)).collect();
    let targets = store.targets(task);
    for (&y, record_idx) in targets.iter().zip(0..) {
        if !link.contains(y) {
            let (lower, upper) = match link {
                MetricRange::Unbounded => (f64::NEG_INFINITY, f64::INFINITY),
                MetricRange::Bounded { lower, upper } => (lower, upper),
                MetricRange::LowerBounded { lower } => (lower, f64::INFINITY),
            };
            let _ = record_idx;
            return Err(Error::RangeViolation {
                task,
                value: y,
                lower,
                upper,
            });
        }
    }

    let mean = targets.iter().sum::<f64>() / k as f64;
    let mut beta = vec![0.0; dim];
    beta[dim - 1] = link.inverse(mean);

    let mut mse = link_mse(&beta, &rows, &targets, link);
    let mut best = (beta.clone(), mse);
    let mut history = Vec::with_capacity(opts.max_iterations + 1);
    history.push(mse);
    let mut step = 1.0f64;
    let mut converged = false;

    for _ in 0..opts.max_iterations {
        let grad = link_mse_gradient(&beta, &rows, &targets, link);
        let grad_norm_sq = dot(&grad, &grad);
        if grad_norm_sq == 0.0 {
            converged = true;
            break;
        }
        // Armijo backtracking along the negative gradient.
        let mut alpha = (step * 2.0).min(1e8);
        let mut accepted = false;
        for _ in 0..80 {
            let candidate: Vec<f64> = beta
                .iter()
                .zip(&grad)
                .map(|(b, g)| b - alpha * g)
                .collect();
            let candidate_mse = link_mse(&candidate, &rows, &targets, link);
            if candidate_mse <= mse - 1e-4 * alpha * grad_norm_sq {
                beta = candidate;
                mse = candidate_mse;
                step = alpha;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // No descent step found; the gradient is numerically flat.
            converged = true;
            break;
        }
        if mse < best.1 {
            best = (beta.clone(), mse);
        }
        history.push(mse);
        let window = opts.convergence_window;
        if history.len() > window {
            let previous = history[history.len() - 1 - window];
            let improvement = (previous - mse) / previous.abs().max(f64::MIN_POSITIVE);
            if improvement < opts.relative_tolerance {
                converged = true;
                break;
            }
        }
    }

    let model = SurrogateModel::from_regression(&best.0, n, link);
    let report = report_for(&model, store, task, false, converged)?;
    Ok((model, report))
}

fn report_for(
    model: &SurrogateModel,
    store: &RecordStore,
    task: usize,
    condition_warning: bool,
    converged: bool,
) -> Result<FitReport> {
    let residual_mse = store
        .records()
        .iter()
        .map(|r| {
            let d = predict(model, &r.c) - r.metrics[task];
            d * d
        })
        .sum::<f64>()
        / store.len() as f64;
    Ok(FitReport {
        r_squared: r_squared(model, store, task)?,
        residual_mse,
        condition_warning,
        converged,
    })
}

/// Coefficient of determination `1 - SS_res / SS_tot`; defined as 0 when
/// the targets have zero variance.
pub fn r_squared(model: &SurrogateModel, store: &RecordStore, task: usize) -> Result<f64> {
    if store.is_empty() {
        return Err(Error::EmptyStore);
    }
    let targets = store.targets(task);
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let ss_tot: f64 = targets.iter().map(|y| (y - mean) * (y - mean)).sum();
    let ss_res: f64 = store
        .records()
        .iter()
        .map(|r| {
            let d = r.metrics[task] - predict(model, &r.c);
            d * d
        })
        .sum();
    if ss_tot == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - ss_res / ss_tot)
}
