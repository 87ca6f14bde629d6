//! Multi-objective optimization over the surrogate objectives.
//!
//! Provides Pareto dominance primitives, non-dominated filtering, NSGA-III
//! reference-point search, a MOEA/D baseline, and brute-force grid search
//! against the true oracle.

mod genetic;
mod moead;
mod nsga3;
pub mod refdirs;

pub use moead::{moead_front, MoeadParams};
pub use nsga3::{nsga3_front, NsgaParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::surrogate::{predict, SurrogateModel};

/// Optimization direction of one objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    /// Maps a raw objective value into minimize-space.
    pub fn to_min_space(self, value: f64) -> f64 {
        match self {
            Direction::Minimize => value,
            Direction::Maximize => -value,
        }
    }
}

/// One solution on a front: decision coefficients and objective values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    pub c: Vec<f64>,
    pub f: Vec<f64>,
}

/// How a front was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Amortized,
    Grid,
    Moead,
    Ingested,
}

/// A set of pairwise non-dominated solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub points: Vec<FrontPoint>,
    pub provenance: Provenance,
}

impl ParetoFront {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Objective dimension of the front's points.
    pub fn objective_dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.f.len())
    }
}

/// The surrogate objectives, their directions, and the decision box.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub surrogates: Vec<SurrogateModel>,
    pub directions: Vec<Direction>,
    /// Per-coordinate (lower, upper) bounds of the decision box.
    pub bounds: Vec<(f64, f64)>,
}

impl ObjectiveSpec {
    pub fn new(
        surrogates: Vec<SurrogateModel>,
        directions: Vec<Direction>,
        bounds: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if surrogates.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = surrogates[0].n_tasks;
        if surrogates.iter().any(|s| s.n_tasks != n) {
            return Err(Error::InvalidParameter(
                "all surrogates must share the task count".into(),
            ));
        }
        if directions.len() != surrogates.len() {
            return Err(Error::LengthMismatch {
                expected: surrogates.len(),
                got: directions.len(),
            });
        }
        if bounds.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: bounds.len(),
            });
        }
        for &(lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParameter(format!(
                    "decision box requires lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self {
            surrogates,
            directions,
            bounds,
        })
    }

    /// Number of objectives (and decision variables).
    pub fn n_objectives(&self) -> usize {
        self.surrogates.len()
    }

    pub fn decision_dim(&self) -> usize {
        self.bounds.len()
    }

    /// Raw surrogate objective values at `c`.
    pub fn evaluate(&self, c: &[f64]) -> Vec<f64> {
        self.surrogates.iter().map(|s| predict(s, c)).collect()
    }
}

/// Pareto dominance after direction normalization: true iff `x` is no worse
/// than `y` in every coordinate and strictly better in at least one.
pub fn dominates(x: &[f64], y: &[f64], directions: &[Direction]) -> Result<bool> {
    if x.len() != y.len() || x.len() != directions.len() {
        return Err(Error::LengthMismatch {
            expected: directions.len(),
            got: x.len().max(y.len()),
        });
    }
    Ok(dominates_min_space_iter(
        x.iter().zip(directions).map(|(&v, d)| d.to_min_space(v)),
        y.iter().zip(directions).map(|(&v, d)| d.to_min_space(v)),
    ))
}

/// Dominance for values already in minimize-space.
pub(crate) fn dominates_min(x: &[f64], y: &[f64]) -> bool {
    dominates_min_space_iter(x.iter().copied(), y.iter().copied())
}

fn dominates_min_space_iter(
    x: impl Iterator<Item = f64>,
    y: impl Iterator<Item = f64>,
) -> bool {
    let mut strictly_better = false;
    for (a, b) in x.zip(y) {
        if a > b {
            return false;
        }
        if a < b {
            strictly_better = true;
        }
    }
    strictly_better
}

fn bits_equal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Canonical order for front points so identical sets serialize identically.
fn sort_points(points: &mut [FrontPoint]) {
    points.sort_by(|p, q| {
        for (a, b) in p.f.iter().chain(p.c.iter()).zip(q.f.iter().chain(q.c.iter())) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                order => return order,
            }
        }
        std::cmp::Ordering::Equal
    });
}

/// Filters a point set down to its non-dominated subset. Exact-duplicate
/// decision vectors are kept once; the result is canonically ordered so it
/// does not depend on input order.
pub fn non_dominated_filter(
    points: &[(Vec<f64>, Vec<f64>)],
    directions: &[Direction],
) -> Result<ParetoFront> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let min_space: Vec<Vec<f64>> = points
        .iter()
        .map(|(_, f)| {
            f.iter()
                .zip(directions)
                .map(|(&v, d)| d.to_min_space(v))
                .collect()
        })
        .collect();
    // Archive insertion: keep a running non-dominated archive.
    let mut archive: Vec<usize> = Vec::new();
    'outer: for idx in 0..points.len() {
        if points[idx].1.len() != directions.len() {
            return Err(Error::LengthMismatch {
                expected: directions.len(),
                got: points[idx].1.len(),
            });
        }
        let mut kept = Vec::with_capacity(archive.len() + 1);
        for &member in &archive {
            if bits_equal(&points[member].0, &points[idx].0)
                || dominates_min(&min_space[member], &min_space[idx])
            {
                continue 'outer;
            }
            if !dominates_min(&min_space[idx], &min_space[member]) {
                kept.push(member);
            }
        }
        kept.push(idx);
        archive = kept;
    }
    let mut front_points: Vec<FrontPoint> = archive
        .into_iter()
        .map(|i| FrontPoint {
            c: points[i].0.clone(),
            f: points[i].1.clone(),
        })
        .collect();
    sort_points(&mut front_points);
    Ok(ParetoFront {
        points: front_points,
        provenance: Provenance::Ingested,
    })
}

/// Evaluates the true oracle on the full lattice over `bounds` and filters
/// the non-dominated points. Every lattice point costs one oracle call; a
/// configured budget cap is checked up front.
pub fn grid_search_front(
    oracle: &dyn Oracle,
    bounds: &[(f64, f64)],
    points_per_dim: usize,
    directions: &[Direction],
) -> Result<ParetoFront> {
    if points_per_dim < 2 {
        return Err(Error::InvalidParameter(
            "grid search needs at least 2 points per dimension".into(),
        ));
    }
    let dim = bounds.len();
    let total = (points_per_dim as u64)
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::InvalidParameter("grid size overflows".into()))?;
    oracle.check_budget(total)?;

    let mut evaluated = Vec::with_capacity(total as usize);
    let mut index = vec![0usize; dim];
    loop {
        let c: Vec<f64> = index
            .iter()
            .zip(bounds)
            .map(|(&i, &(lo, hi))| lo + (hi - lo) * i as f64 / (points_per_dim - 1) as f64)
            .collect();
        let f = oracle.evaluate(&c)?;
        evaluated.push((c, f));
        // Mixed-radix increment over the lattice.
        let mut pos = dim;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            index[pos] += 1;
            if index[pos] < points_per_dim {
                break;
            }
            index[pos] = 0;
            if pos == 0 {
                let mut front = non_dominated_filter(&evaluated, directions)?;
                front.provenance = Provenance::Grid;
                return Ok(front);
            }
        }
    }
}

/// Result of an evolutionary search: the front plus how many surrogate
/// evaluations it spent.
#[derive(Debug, Clone)]
pub struct MoopRun {
    pub front: ParetoFront,
    pub surrogate_evals: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN2: [Direction; 2] = [Direction::Minimize, Direction::Minimize];

    #[test]
    fn dominates_strict_in_both() {
        assert!(dominates(&[0.1, 0.2], &[0.2, 0.3], &MIN2).unwrap());
        assert!(!dominates(&[0.2, 0.3], &[0.1, 0.2], &MIN2).unwrap());
    }

    #[test]
    fn equal_vectors_do_not_dominate() {
        assert!(!dominates(&[0.5, 0.5], &[0.5, 0.5], &MIN2).unwrap());
    }

    #[test]
    fn incomparable_vectors() {
        assert!(!dominates(&[0.1, 0.5], &[0.5, 0.1], &MIN2).unwrap());
        assert!(!dominates(&[0.5, 0.1], &[0.1, 0.5], &MIN2).unwrap());
    }

    #[test]
    fn dominance_respects_maximize() {
        let dirs = [Direction::Maximize, Direction::Maximize];
        assert!(dominates(&[0.9, 0.8], &[0.5, 0.8], &dirs).unwrap());
        assert!(!dominates(&[0.5, 0.8], &[0.9, 0.8], &dirs).unwrap());
    }

    #[test]
    fn dominance_length_mismatch() {
        assert!(matches!(
            dominates(&[0.1], &[0.2, 0.3], &MIN2),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn filter_drops_dominated_point() {
        let points = vec![
            (vec![0.0], vec![0.0, 0.0]),
            (vec![1.0], vec![1.0, 1.0]),
        ];
        let front = non_dominated_filter(&points, &MIN2).unwrap();
        assert_eq!(front.len(), 1);
        assert_eq!(front.points[0].f, vec![0.0, 0.0]);
    }

    #[test]
    fn filter_keeps_perfect_tradeoff() {
        let points: Vec<(Vec<f64>, Vec<f64>)> = [0.0, 0.5, 1.0]
            .iter()
            .map(|&c1| (vec![c1], vec![c1, 1.0 - c1]))
            .collect();
        let front = non_dominated_filter(&points, &MIN2).unwrap();
        assert_eq!(front.len(), 3);
    }

    #[test]
    fn filter_empty_input_errors() {
        assert!(matches!(
            non_dominated_filter(&[], &MIN2),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn filter_is_idempotent_and_order_independent() {
        let mut rng = crate::rng::substream(5, "filter");
        use rand::Rng;
        let points: Vec<(Vec<f64>, Vec<f64>)> = (0..60)
            .map(|_| {
                (
                    vec![rng.gen::<f64>()],
                    vec![rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()],
                )
            })
            .collect();
        let dirs = [Direction::Minimize; 3];
        let front = non_dominated_filter(&points, &dirs).unwrap();
        let again: Vec<(Vec<f64>, Vec<f64>)> = front
            .points
            .iter()
            .map(|p| (p.c.clone(), p.f.clone()))
            .collect();
        let refiltered = non_dominated_filter(&again, &dirs).unwrap();
        assert_eq!(front.points, refiltered.points);

        let mut reversed = points.clone();
        reversed.reverse();
        let front_rev = non_dominated_filter(&reversed, &dirs).unwrap();
        assert_eq!(front.points, front_rev.points);
    }

    #[test]
    fn filter_scale_invariance_of_membership() {
        let mut rng = crate::rng::substream(6, "scale");
        use rand::Rng;
        let points: Vec<(Vec<f64>, Vec<f64>)> = (0..40)
            .map(|i| {
                (
                    vec![i as f64],
                    vec![rng.gen::<f64>(), rng.gen::<f64>()],
                )
            })
            .collect();
        let front = non_dominated_filter(&points, &MIN2).unwrap();
        let scaled: Vec<(Vec<f64>, Vec<f64>)> = points
            .iter()
            .map(|(c, f)| (c.clone(), vec![f[0] * 17.5, f[1]]))
            .collect();
        let front_scaled = non_dominated_filter(&scaled, &MIN2).unwrap();
        let ids: Vec<f64> = front.points.iter().map(|p| p.c[0]).collect();
        let ids_scaled: Vec<f64> = front_scaled.points.iter().map(|p| p.c[0]).collect();
        let mut a = ids.clone();
        let mut b = ids_scaled.clone();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn grid_search_counts_lattice_evaluations() {
        use crate::oracle::FnOracle;
        let oracle = FnOracle::new(2, |c: &[f64]| vec![c[0], c[1]]);
        let front =
            grid_search_front(&oracle, &[(0.0, 1.0), (0.0, 1.0)], 3, &MIN2).unwrap();
        assert_eq!(oracle.eval_count(), 9);
        assert_eq!(front.len(), 1); // both objectives minimized at the origin
        assert_eq!(front.provenance, Provenance::Grid);
    }

    #[test]
    fn grid_search_no_tradeoff_single_point() {
        // Both objectives equal the single decision coordinate: no
        // trade-off, so only the lattice minimum survives.
        use crate::oracle::FnOracle;
        let oracle = FnOracle::new(2, |c: &[f64]| vec![c[0], c[0]]);
        let front = grid_search_front(&oracle, &[(0.2, 0.8)], 4, &MIN2).unwrap();
        assert_eq!(front.len(), 1);
        assert!((front.points[0].f[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn grid_search_budget_checked_up_front() {
        use crate::oracle::FnOracle;
        let oracle = FnOracle::new(2, |c: &[f64]| vec![c[0], c[1]]).with_budget_cap(Some(8));
        let err = grid_search_front(&oracle, &[(0.0, 1.0), (0.0, 1.0)], 3, &MIN2).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { cap: 8, .. }));
        assert_eq!(oracle.eval_count(), 0);
    }
}
