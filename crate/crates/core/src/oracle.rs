//! Evaluation oracles and the record store.
//!
//! The oracle provides the per-task metric functions `M_n(c)` for a merged
//! model identified by its scaling coefficients. Synthetic landscapes serve
//! as ground truth for verification; externally produced evaluations are
//! ingested through the record store. Every synthetic evaluation is charged
//! against an evaluation budget, the scarce resource the whole method
//! amortizes.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::coefficient_keyed_stream;

/// Feasible range of an evaluation metric, which selects the link applied
/// on top of the quadratic term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricRange {
    /// Metric spans the whole real axis; the quadratic is used as-is.
    Unbounded,
    /// Metric restricted to `[lower, upper]`; sigmoid link.
    Bounded {
        #[serde(rename = "l")]
        lower: f64,
        #[serde(rename = "u")]
        upper: f64,
    },
    /// Metric restricted to `[lower, inf)`; softplus link.
    LowerBounded {
        #[serde(rename = "l")]
        lower: f64,
    },
}

fn sigmoid(q: f64) -> f64 {
    if q >= 0.0 {
        1.0 / (1.0 + (-q).exp())
    } else {
        let e = q.exp();
        e / (1.0 + e)
    }
}

fn softplus(q: f64) -> f64 {
    q.max(0.0) + (-q.abs()).exp().ln_1p()
}

impl MetricRange {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MetricRange::Unbounded => Ok(()),
            MetricRange::Bounded { lower, upper } => {
                if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                    Err(Error::InvalidParameter(format!(
                        "bounded range requires lower < upper, got [{lower}, {upper}]"
                    )))
                } else {
                    Ok(())
                }
            }
            MetricRange::LowerBounded { lower } => {
                if !lower.is_finite() {
                    Err(Error::InvalidParameter("non-finite lower bound".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Applies the link to the quadratic value `q`. Bounded outputs stay
    /// strictly inside the open interval for finite `q`.
    pub fn apply(&self, q: f64) -> f64 {
        match *self {
            MetricRange::Unbounded => q,
            MetricRange::Bounded { lower, upper } => {
                let s = sigmoid(q).clamp(f64::EPSILON, 1.0 - f64::EPSILON);
                let out = lower + (upper - lower) * s;
                if out <= lower {
                    lower.next_up()
                } else if out >= upper {
                    upper.next_down()
                } else {
                    out
                }
            }
            MetricRange::LowerBounded { lower } => lower + softplus(q),
        }
    }

    /// Derivative of the link output with respect to `q`.
    pub fn derivative(&self, q: f64) -> f64 {
        match *self {
            MetricRange::Unbounded => 1.0,
            MetricRange::Bounded { lower, upper } => {
                let s = sigmoid(q);
                (upper - lower) * s * (1.0 - s)
            }
            MetricRange::LowerBounded { .. } => sigmoid(q),
        }
    }

    /// Link inverse of a target value, used to initialize fits at the best
    /// constant model. Targets at or beyond a bound are clipped inward by
    /// `1e-6` before inversion.
    pub fn inverse(&self, y: f64) -> f64 {
        const EPS: f64 = 1e-6;
        match *self {
            MetricRange::Unbounded => y,
            MetricRange::Bounded { lower, upper } => {
                let y = y.clamp(lower + EPS, upper - EPS);
                let s = (y - lower) / (upper - lower);
                (s / (1.0 - s)).ln()
            }
            MetricRange::LowerBounded { lower } => {
                let x = (y - lower).max(EPS);
                if x > 30.0 {
                    x + (-(-x).exp()).ln_1p()
                } else {
                    x.exp_m1().ln()
                }
            }
        }
    }

    /// Checks that a metric value lies in the declared range.
    pub fn contains(&self, value: f64) -> bool {
        match *self {
            MetricRange::Unbounded => value.is_finite(),
            MetricRange::Bounded { lower, upper } => value >= lower && value <= upper,
            MetricRange::LowerBounded { lower } => value >= lower && value.is_finite(),
        }
    }
}

/// Ground-truth quadratic (plus optional cubic remainder) landscape for one
/// task.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskLandscape {
    /// Symmetric N x N quadratic coefficient matrix.
    pub a: Vec<Vec<f64>>,
    /// Linear coefficient vector, length N.
    pub b: Vec<f64>,
    /// Constant term.
    pub e: f64,
    /// Link / feasible range of the task's metric.
    pub link: MetricRange,
}

/// Synthetic ground-truth landscape over scaling coefficients: one quadratic
/// per task, a shared cubic remainder strength, and a shared noise level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticLandscape {
    pub tasks: Vec<TaskLandscape>,
    /// Strength of the odd third-order remainder `gamma * sum_i c_i^3`.
    #[serde(default)]
    pub cubic_gamma: f64,
    /// Standard deviation of Gaussian noise added to the quadratic value
    /// before the link, so bounded metrics stay in range.
    #[serde(default)]
    pub noise_sigma: f64,
}

impl SyntheticLandscape {
    pub fn task_count(&self) -> usize {
        self.tasks.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() {
            return Err(Error::InvalidParameter("landscape has no tasks".into()));
        }
        let n = self.tasks.len();
        for (idx, task) in self.tasks.iter().enumerate() {
            if task.a.len() != n || task.a.iter().any(|row| row.len() != n) {
                return Err(Error::InvalidParameter(format!(
                    "task {idx}: quadratic matrix must be {n}x{n}"
                )));
            }
            if task.b.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: task.b.len(),
                });
            }
            for i in 0..n {
                for j in 0..n {
                    if !task.a[i][j].is_finite() {
                        return Err(Error::NonFinite {
                            context: "landscape quadratic matrix",
                        });
                    }
                    if (task.a[i][j] - task.a[j][i]).abs() > 0.0 {
                        return Err(Error::InvalidParameter(format!(
                            "task {idx}: quadratic matrix is not symmetric at ({i},{j})"
                        )));
                    }
                }
            }
            if task.b.iter().any(|v| !v.is_finite()) || !task.e.is_finite() {
                return Err(Error::NonFinite {
                    context: "landscape coefficients",
                });
            }
            task.link.validate()?;
        }
        if !(self.cubic_gamma.is_finite() && self.cubic_gamma >= 0.0) {
            return Err(Error::InvalidParameter("cubic_gamma must be >= 0".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter("noise_sigma must be >= 0".into()));
        }
        Ok(())
    }

    /// Quadratic value (pre-link, pre-noise) of task `n` at `c`.
    fn quadratic(&self, n: usize, c: &[f64]) -> f64 {
        let task = &self.tasks[n];
        let dim = c.len();
        let mut q = task.e;
        for i in 0..dim {
            q += task.b[i] * c[i];
            q += 0.5 * task.a[i][i] * c[i] * c[i];
            for j in (i + 1)..dim {
                q += task.a[i][j] * c[i] * c[j];
            }
        }
        if self.cubic_gamma != 0.0 {
            q += self.cubic_gamma * c.iter().map(|x| x * x * x).sum::<f64>();
        }
        q
    }

    /// Evaluates all task metrics at `c` with noise keyed by `(seed, c)`, so
    /// repeated evaluation of the same coefficients is reproducible.
    pub fn eval_synthetic(&self, c: &[f64], noise_seed: u64) -> Result<Vec<f64>> {
        self.check_coefficients(c)?;
        let mut noise_rng = coefficient_keyed_stream(noise_seed, c);
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let mut out = Vec::with_capacity(self.tasks.len());
        for n in 0..self.tasks.len() {
            let mut q = self.quadratic(n, c);
            if self.noise_sigma > 0.0 {
                q += self.noise_sigma * normal.sample(&mut noise_rng);
            } else {
                // Keep the draw order fixed whether or not noise is enabled.
                let _ = noise_rng.gen::<u64>();
            }
            out.push(self.tasks[n].link.apply(q));
        }
        Ok(out)
    }

    fn check_coefficients(&self, c: &[f64]) -> Result<()> {
        if c.len() != self.tasks.len() {
            return Err(Error::LengthMismatch {
                expected: self.tasks.len(),
                got: c.len(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "scaling coefficients",
            });
        }
        Ok(())
    }

    pub fn links(&self) -> Vec<MetricRange> {
        self.tasks.iter().map(|t| t.link).collect()
    }
}

/// Deterministically generates an `n_tasks`-task landscape whose per-task
/// optima sit near distinct corners of the unit box, so the tasks genuinely
/// trade off. Bounded links get concave peaks (metrics to maximize); other
/// links get convex bowls (losses to minimize).
#[allow(clippy::needless_range_loop)] // symmetric matrix fill writes (i,j) and (j,i)
pub fn generate_tradeoff_landscape(
    n_tasks: usize,
    link: MetricRange,
    cubic_gamma: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<SyntheticLandscape> {
    if n_tasks == 0 {
        return Err(Error::InvalidParameter("need at least one task".into()));
    }
    link.validate()?;
    let mut rng = crate::rng::substream(seed, "landscape");
    let concave = matches!(link, MetricRange::Bounded { .. });
    let tasks = (0..n_tasks)
        .map(|t| {
            // Optimum anchored near the task's own axis corner.
            let anchor: Vec<f64> = (0..n_tasks)
                .map(|i| {
                    if i == t {
                        0.75 + 0.2 * rng.gen::<f64>()
                    } else {
                        0.05 + 0.25 * rng.gen::<f64>()
                    }
                })
                .collect();
            // Diagonally dominant curvature keeps the quadratic definite.
            let mut a = vec![vec![0.0; n_tasks]; n_tasks];
            for i in 0..n_tasks {
                a[i][i] = 3.0 + 2.0 * rng.gen::<f64>();
                for j in (i + 1)..n_tasks {
                    let off = 0.3 * (rng.gen::<f64>() - 0.5);
                    a[i][j] = off;
                    a[j][i] = off;
                }
            }
            if concave {
                for row in a.iter_mut() {
                    for v in row.iter_mut() {
                        *v = -*v;
                    }
                }
            }
            let b: Vec<f64> = (0..n_tasks)
                .map(|i| -(0..n_tasks).map(|j| a[i][j] * anchor[j]).sum::<f64>())
                .collect();
            let optimum_value = if concave {
                1.0 + 0.5 * rng.gen::<f64>()
            } else {
                0.2 * rng.gen::<f64>()
            };
            let half_pap = 0.5
                * (0..n_tasks)
                    .map(|i| {
                        (0..n_tasks)
                            .map(|j| anchor[i] * a[i][j] * anchor[j])
                            .sum::<f64>()
                    })
                    .sum::<f64>();
            TaskLandscape {
                a,
                b,
                e: optimum_value + half_pap,
                link,
            }
        })
        .collect();
    let landscape = SyntheticLandscape {
        tasks,
        cubic_gamma,
        noise_sigma,
    };
    landscape.validate()?;
    Ok(landscape)
}

/// Shared evaluation counter with an optional hard cap.
///
/// Billing: evaluating a merged model on the full task suite costs one unit
/// (the benchmark pass is shared); evaluating a subset of tasks costs one
/// unit per task queried. This mirrors how the two evaluation-count
/// accountings are reported: whole-suite counts for plain amortized runs,
/// per-task counts for nested merging.
#[derive(Debug, Default)]
pub struct EvalBudget {
    used: AtomicU64,
    cap: Option<u64>,
}

impl EvalBudget {
    pub fn new(cap: Option<u64>) -> Self {
        Self {
            used: AtomicU64::new(0),
            cap,
        }
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::SeqCst)
    }

    pub fn cap(&self) -> Option<u64> {
        self.cap
    }

    /// Charges `units` against the budget, failing without charging if the
    /// cap would be violated.
    pub fn charge(&self, units: u64) -> Result<()> {
        loop {
            let current = self.used.load(Ordering::SeqCst);
            let requested = current + units;
            if let Some(cap) = self.cap {
                if requested > cap {
                    return Err(Error::BudgetExceeded { cap, requested });
                }
            }
            if self
                .used
                .compare_exchange(current, requested, Ordering::SeqCst, Ordering::SeqCst)
                .is_ok()
            {
                return Ok(());
            }
        }
    }

    /// Fails if charging `units` would violate the cap, without charging.
    pub fn check(&self, units: u64) -> Result<()> {
        if let Some(cap) = self.cap {
            let requested = self.used() + units;
            if requested > cap {
                return Err(Error::BudgetExceeded { cap, requested });
            }
        }
        Ok(())
    }
}

/// A true evaluation oracle over scaling coefficients.
///
/// `evaluate` runs the full task suite on one merged model and costs one
/// budget unit; `evaluate_tasks` queries a subset of tasks and costs one
/// unit per task.
pub trait Oracle: Sync {
    fn task_count(&self) -> usize;

    /// All `N` task metrics at `c`. Costs 1 budget unit.
    fn evaluate(&self, c: &[f64]) -> Result<Vec<f64>>;

    /// Metrics for the listed tasks at `c`. Costs `tasks.len()` units.
    fn evaluate_tasks(&self, c: &[f64], tasks: &[usize]) -> Result<Vec<f64>>;

    /// Budget units consumed so far.
    fn eval_count(&self) -> u64;

    /// Fails if `units` further evaluations would violate the budget cap.
    fn check_budget(&self, units: u64) -> Result<()>;
}

/// Budgeted oracle backed by a synthetic landscape.
#[derive(Debug)]
pub struct SyntheticOracle {
    landscape: SyntheticLandscape,
    noise_seed: u64,
    budget: EvalBudget,
}

impl SyntheticOracle {
    pub fn new(landscape: SyntheticLandscape, noise_seed: u64) -> Result<Self> {
        landscape.validate()?;
        Ok(Self {
            landscape,
            noise_seed,
            budget: EvalBudget::new(None),
        })
    }

    pub fn with_budget_cap(mut self, cap: Option<u64>) -> Self {
        self.budget = EvalBudget::new(cap);
        self
    }

    pub fn landscape(&self) -> &SyntheticLandscape {
        &self.landscape
    }

    pub fn budget(&self) -> &EvalBudget {
        &self.budget
    }
}

impl Oracle for SyntheticOracle {
    fn task_count(&self) -> usize {
        self.landscape.task_count()
    }

    fn evaluate(&self, c: &[f64]) -> Result<Vec<f64>> {
        self.budget.charge(1)?;
        self.landscape.eval_synthetic(c, self.noise_seed)
    }

    fn evaluate_tasks(&self, c: &[f64], tasks: &[usize]) -> Result<Vec<f64>> {
        self.budget.charge(tasks.len() as u64)?;
        let all = self.landscape.eval_synthetic(c, self.noise_seed)?;
        tasks
            .iter()
            .map(|&t| {
                all.get(t).copied().ok_or(Error::InvalidParameter(format!(
                    "task index {t} out of range"
                )))
            })
            .collect()
    }

    fn eval_count(&self) -> u64 {
        self.budget.used()
    }

    fn check_budget(&self, units: u64) -> Result<()> {
        self.budget.check(units)
    }
}

/// Oracle backed by an arbitrary function, mainly for tests and for wiring
/// external evaluation pipelines in library use.
pub struct FnOracle<F: Fn(&[f64]) -> Vec<f64> + Sync> {
    task_count: usize,
    f: F,
    budget: EvalBudget,
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> FnOracle<F> {
    pub fn new(task_count: usize, f: F) -> Self {
        Self {
            task_count,
            f,
            budget: EvalBudget::new(None),
        }
    }

    pub fn with_budget_cap(mut self, cap: Option<u64>) -> Self {
        self.budget = EvalBudget::new(cap);
        self
    }

    pub fn budget(&self) -> &EvalBudget {
        &self.budget
    }
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> Oracle for FnOracle<F> {
    fn task_count(&self) -> usize {
        self.task_count
    }

    fn evaluate(&self, c: &[f64]) -> Result<Vec<f64>> {
        self.budget.charge(1)?;
        Ok((self.f)(c))
    }

    fn evaluate_tasks(&self, c: &[f64], tasks: &[usize]) -> Result<Vec<f64>> {
        self.budget.charge(tasks.len() as u64)?;
        let all = (self.f)(c);
        Ok(tasks.iter().map(|&t| all[t]).collect())
    }

    fn eval_count(&self) -> u64 {
        self.budget.used()
    }

    fn check_budget(&self, units: u64) -> Result<()> {
        self.budget.check(units)
    }
}

/// Where an evaluation record came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordSource {
    Synthetic,
    Ingested,
}

/// One evaluated sample: scaling coefficients and per-task metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub c: Vec<f64>,
    pub metrics: Vec<f64>,
    pub source: RecordSource,
}

/// Store of evaluation records with exact-duplicate deduplication on `c`
/// and an evaluation counter for budget audits.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordStore {
    n_tasks: usize,
    records: Vec<EvaluationRecord>,
    eval_count: u64,
}

fn bits_equal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

impl RecordStore {
    pub fn new(n_tasks: usize) -> Self {
        Self {
            n_tasks,
            records: Vec::new(),
            eval_count: 0,
        }
    }

    pub fn n_tasks(&self) -> usize {
        self.n_tasks
    }

    pub fn records(&self) -> &[EvaluationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    /// Targets for one task across all records.
    pub fn targets(&self, task: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.metrics[task]).collect()
    }

    fn push(&mut self, record: EvaluationRecord) -> Result<bool> {
        if record.c.len() != self.n_tasks || record.metrics.len() != self.n_tasks {
            return Err(Error::LengthMismatch {
                expected: self.n_tasks,
                got: record.c.len().max(record.metrics.len()),
            });
        }
        if self.records.iter().any(|r| bits_equal(&r.c, &record.c)) {
            return Ok(false);
        }
        self.records.push(record);
        Ok(true)
    }

    /// Adds a record produced by a counted synthetic evaluation.
    pub fn add_evaluated(&mut self, c: Vec<f64>, metrics: Vec<f64>) -> Result<bool> {
        self.eval_count += 1;
        self.push(EvaluationRecord {
            c,
            metrics,
            source: RecordSource::Synthetic,
        })
    }

    /// Adds an externally produced record; its cost was paid elsewhere.
    pub fn add_ingested(&mut self, c: Vec<f64>, metrics: Vec<f64>) -> Result<bool> {
        self.push(EvaluationRecord {
            c,
            metrics,
            source: RecordSource::Ingested,
        })
    }

    /// Verifies every metric against its declared range.
    pub fn check_ranges(&self, ranges: &[MetricRange]) -> Result<()> {
        if ranges.len() != self.n_tasks {
            return Err(Error::LengthMismatch {
                expected: self.n_tasks,
                got: ranges.len(),
            });
        }
        for record in &self.records {
            for (task, (&value, range)) in record.metrics.iter().zip(ranges).enumerate() {
                if !range.contains(value) {
                    let (lower, upper) = match *range {
                        MetricRange::Unbounded => (f64::NEG_INFINITY, f64::INFINITY),
                        MetricRange::Bounded { lower, upper } => (lower, upper),
                        MetricRange::LowerBounded { lower } => (lower, f64::INFINITY),
                    };
                    return Err(Error::RangeViolation {
                        task,
                        value,
                        lower,
                        upper,
                    });
                }
            }
        }
        Ok(())
    }

    /// Writes the store as CSV with header `c_1,...,c_N,m_1,...,m_N`.
    /// Reals are printed at 17 significant digits so reloading is bit-exact.
    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        let mut header = Vec::with_capacity(2 * self.n_tasks);
        for i in 1..=self.n_tasks {
            header.push(format!("c_{i}"));
        }
        for i in 1..=self.n_tasks {
            header.push(format!("m_{i}"));
        }
        writeln!(w, "{}", header.join(","))?;
        for record in &self.records {
            let fields: Vec<String> = record
                .c
                .iter()
                .chain(record.metrics.iter())
                .map(|v| format!("{v:.16e}"))
                .collect();
            writeln!(w, "{}", fields.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Loads a CSV record file; ingested records do not count against the
    /// evaluation budget. When `ranges` is given, every metric is checked.
    pub fn load_csv(path: &Path, ranges: Option<&[MetricRange]>) -> Result<Self> {
        let file = File::open(path)?;
        let reader = BufReader::new(file);
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let header = header?;
        let columns: Vec<&str> = header.trim().split(',').collect();
        if columns.len() < 2 || !columns.len().is_multiple_of(2) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected an even number of c/m columns, got {}", columns.len()),
            });
        }
        let n = columns.len() / 2;
        for i in 0..n {
            if columns[i] != format!("c_{}", i + 1) || columns[n + i] != format!("m_{}", i + 1) {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("unexpected header column `{}`", columns[i.min(n + i)]),
                });
            }
        }
        let mut store = RecordStore::new(n);
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 2 * n {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {} fields, got {}", 2 * n, fields.len()),
                });
            }
            let parse = |s: &str| -> std::result::Result<f64, Error> {
                s.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad number `{s}`: {e}"),
                })
            };
            let c = fields[..n].iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
            let metrics = fields[n..].iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
            store.add_ingested(c, metrics)?;
        }
        if let Some(ranges) = ranges {
            store.check_ranges(ranges)?;
        }
        Ok(store)
    }

    /// Writes the store as JSON with a metadata object.
    pub fn save_json(
        &self,
        path: &Path,
        ranges: Option<&[MetricRange]>,
        description: Option<&str>,
    ) -> Result<()> {
        let doc = RecordDocument {
            meta: RecordMeta {
                n_tasks: self.n_tasks,
                ranges: ranges.map(|r| r.to_vec()),
                description: description.map(|s| s.to_string()),
            },
            records: self.records.clone(),
        };
        let file = File::create(path)?;
        serde_json::to_writer_pretty(BufWriter::new(file), &doc)?;
        Ok(())
    }

    /// Loads the JSON record format, checking metrics against any ranges
    /// declared in the metadata.
    pub fn load_json(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let doc: RecordDocument = serde_json::from_reader(BufReader::new(file))?;
        let mut store = RecordStore::new(doc.meta.n_tasks);
        for record in doc.records {
            store.add_ingested(record.c, record.metrics)?;
        }
        if let Some(ranges) = &doc.meta.ranges {
            store.check_ranges(ranges)?;
        }
        Ok(store)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordMeta {
    n_tasks: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ranges: Option<Vec<MetricRange>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordDocument {
    meta: RecordMeta,
    records: Vec<EvaluationRecord>,
}
