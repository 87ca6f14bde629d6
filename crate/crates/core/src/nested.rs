//! Nested pairwise merging guided by loss proximity and a preference
//! vector.
//!
//! Instead of searching all `N` scaling coefficients at once, nodes are
//! merged two at a time: the pair with the closest losses runs a 2-task
//! amortized-front search, a preference rule picks one point off the front,
//! and the merged result re-enters the pool. Every intermediate model stays
//! in the span of the original task vectors, so its true metrics are
//! queried through its effective coefficients over the original tasks.
//! Evaluation cost drops to `T * N * ceil(log2 N)` per-task queries at the
//! price of not producing a complete final front.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::PreferenceVector;
use crate::model::{merge_model, ParameterVector, TaskMatrix};
use crate::moop::{Direction, ParetoFront};
use crate::oracle::{MetricRange, Oracle};
use crate::pipeline::{run_map, MapConfig, MoopParams, SamplingScheme};
use crate::rng::indexed_substream;

/// A live merge node: the original tasks it covers, its current loss, its
/// parameters, and its effective coefficients over the original task basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskNode {
    pub task_ids: Vec<usize>,
    pub loss: f64,
    pub params: ParameterVector,
    /// Coefficients `gamma` such that `params = pretrained + V * gamma`.
    pub coeffs: Vec<f64>,
}

impl TaskNode {
    /// Leaf node for one original task; its effective coefficients are the
    /// one-hot vector for that task.
    pub fn leaf(task_id: usize, n_tasks: usize, params: ParameterVector) -> Self {
        let mut coeffs = vec![0.0; n_tasks];
        coeffs[task_id] = 1.0;
        Self {
            task_ids: vec![task_id],
            loss: 0.0,
            params,
            coeffs,
        }
    }
}

/// Builds the leaf nodes for a pretrained model and its fine-tuned models.
pub fn leaf_nodes(
    pretrained: &ParameterVector,
    finetuned: &[ParameterVector],
) -> Result<Vec<TaskNode>> {
    let n = finetuned.len();
    finetuned
        .iter()
        .enumerate()
        .map(|(task_id, params)| {
            if params.len() != pretrained.len() {
                return Err(Error::LengthMismatch {
                    expected: pretrained.len(),
                    got: params.len(),
                });
            }
            Ok(TaskNode::leaf(task_id, n, params.clone()))
        })
        .collect()
}

/// Index pair minimizing `|loss_i - loss_j|`, ties broken by the smallest
/// `(i, j)` lexicographically.
pub fn pair_closest(nodes: &[TaskNode]) -> Result<(usize, usize)> {
    if nodes.len() < 2 {
        return Err(Error::TooFewNodes { got: nodes.len() });
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, left) in nodes.iter().enumerate() {
        for (j, right) in nodes.iter().enumerate().skip(i + 1) {
            let diff = (left.loss - right.loss).abs();
            if best.is_none_or(|(d, _, _)| diff < d) {
                best = Some((diff, i, j));
            }
        }
    }
    let (_, i, j) = best.expect("at least one pair");
    Ok((i, j))
}

/// Front point maximizing the preference-weighted sum of
/// direction-normalized objectives; ties break toward the lowest index.
pub fn select_from_front(
    front: &ParetoFront,
    pref: &PreferenceVector,
    directions: &[Direction],
) -> Result<Vec<f64>> {
    if front.is_empty() {
        return Err(Error::EmptyFront);
    }
    if pref.len() != front.objective_dim() || directions.len() != front.objective_dim() {
        return Err(Error::LengthMismatch {
            expected: front.objective_dim(),
            got: pref.len().min(directions.len()),
        });
    }
    let score = |f: &[f64]| -> f64 {
        f.iter()
            .zip(&pref.weights)
            .zip(directions)
            .map(|((&v, &w), d)| {
                let oriented = match d {
                    Direction::Maximize => v,
                    Direction::Minimize => -v,
                };
                w * oriented
            })
            .sum()
    };
    let mut best = (0usize, score(&front.points[0].f));
    for (idx, point) in front.points.iter().enumerate().skip(1) {
        let s = score(&point.f);
        if s > best.1 {
            best = (idx, s);
        }
    }
    Ok(front.points[best.0].c.clone())
}

/// Nested-merge configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NestedConfig {
    /// Scaling-coefficient samples per pairwise merge (`T`).
    pub per_pair_budget: usize,
    /// Per-original-task metric ranges.
    pub links: Vec<MetricRange>,
    /// Shared optimization direction of all task metrics.
    pub direction: Direction,
    /// Box for the two pair-level coefficients.
    #[serde(default = "default_pair_bounds")]
    pub pair_bounds: (f64, f64),
    #[serde(default)]
    pub moop: MoopParams,
    pub seed: u64,
}

fn default_pair_bounds() -> (f64, f64) {
    (0.0, 1.0)
}

/// One merge step in the audit tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergeStep {
    pub round: usize,
    pub left_tasks: Vec<usize>,
    pub right_tasks: Vec<usize>,
    pub chosen_c: Vec<f64>,
    pub front_size: usize,
    pub map_evals: u64,
}

/// Per-round audit record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergeRound {
    pub round: usize,
    pub node_losses: Vec<f64>,
    pub carried_over: Option<Vec<usize>>,
    pub loss_probe_evals: u64,
    pub steps: Vec<MergeStep>,
}

/// Result of a nested merge.
#[derive(Debug, Clone)]
pub struct NestedOutcome {
    pub final_params: ParameterVector,
    /// Effective coefficients of the final model over the original tasks.
    pub final_coeffs: Vec<f64>,
    pub intermediate_fronts: Vec<ParetoFront>,
    pub rounds: Vec<MergeRound>,
    /// Per-task oracle queries spent inside the pairwise front searches.
    pub map_evals: u64,
    /// Per-task oracle queries spent measuring node losses each round.
    pub loss_probe_evals: u64,
    /// Total oracle budget units consumed.
    pub eval_count: u64,
}

/// Preference weights of a node's tasks renormalized within the node;
/// falls back to equal weights when the node's total preference is zero.
fn node_weights(task_ids: &[usize], pref: &PreferenceVector) -> Vec<f64> {
    let total: f64 = task_ids.iter().map(|&t| pref.weights[t]).sum();
    if total > 0.0 {
        task_ids.iter().map(|&t| pref.weights[t] / total).collect()
    } else {
        vec![1.0 / task_ids.len() as f64; task_ids.len()]
    }
}

fn weighted_mean(values: &[f64], weights: &[f64]) -> f64 {
    values.iter().zip(weights).map(|(v, w)| v * w).sum()
}

/// Aggregated metric of a node at effective coefficients `gamma`, queried
/// per task through the oracle.
fn node_metric(
    node: &TaskNode,
    gamma: &[f64],
    pref: &PreferenceVector,
    oracle: &dyn Oracle,
) -> Result<f64> {
    let metrics = oracle.evaluate_tasks(gamma, &node.task_ids)?;
    Ok(weighted_mean(&metrics, &node_weights(&node.task_ids, pref)))
}

fn to_loss(value: f64, direction: Direction) -> f64 {
    match direction {
        Direction::Minimize => value,
        Direction::Maximize => -value,
    }
}

/// Shared link of a node's tasks, or unbounded when the tasks disagree
/// (a convex preference combination preserves a common range).
fn node_link(task_ids: &[usize], links: &[MetricRange]) -> MetricRange {
    let first = links[task_ids[0]];
    if task_ids.iter().all(|&t| links[t] == first) {
        first
    } else {
        MetricRange::Unbounded
    }
}

/// 2-objective oracle over pair-level coefficients, billing the underlying
/// oracle per original-task query.
struct PairOracle<'a> {
    inner: &'a dyn Oracle,
    left: &'a TaskNode,
    right: &'a TaskNode,
    pref: &'a PreferenceVector,
}

impl PairOracle<'_> {
    fn effective_gamma(&self, c: &[f64]) -> Vec<f64> {
        self.left
            .coeffs
            .iter()
            .zip(&self.right.coeffs)
            .map(|(l, r)| c[0] * l + c[1] * r)
            .collect()
    }
}

impl Oracle for PairOracle<'_> {
    fn task_count(&self) -> usize {
        2
    }

    fn evaluate(&self, c: &[f64]) -> Result<Vec<f64>> {
        let gamma = self.effective_gamma(c);
        Ok(vec![
            node_metric(self.left, &gamma, self.pref, self.inner)?,
            node_metric(self.right, &gamma, self.pref, self.inner)?,
        ])
    }

    fn evaluate_tasks(&self, c: &[f64], tasks: &[usize]) -> Result<Vec<f64>> {
        let all = self.evaluate(c)?;
        Ok(tasks.iter().map(|&t| all[t]).collect())
    }

    fn eval_count(&self) -> u64 {
        self.inner.eval_count()
    }

    fn check_budget(&self, units: u64) -> Result<()> {
        let per_eval = (self.left.task_ids.len() + self.right.task_ids.len()) as u64;
        self.inner.check_budget(units * per_eval)
    }
}

/// Runs nested pairwise merging until a single node remains.
pub fn nested_merge(
    pretrained: &ParameterVector,
    nodes: Vec<TaskNode>,
    pref: &PreferenceVector,
    config: &NestedConfig,
    oracle: &dyn Oracle,
) -> Result<NestedOutcome> {
    let n_tasks = oracle.task_count();
    if nodes.len() < 2 {
        return Err(Error::TooFewNodes { got: nodes.len() });
    }
    if pref.len() != n_tasks {
        return Err(Error::LengthMismatch {
            expected: n_tasks,
            got: pref.len(),
        });
    }
    if config.links.len() != n_tasks {
        return Err(Error::LengthMismatch {
            expected: n_tasks,
            got: config.links.len(),
        });
    }
    {
        let mut seen = vec![false; n_tasks];
        for node in &nodes {
            for &t in &node.task_ids {
                if t >= n_tasks || seen[t] {
                    return Err(Error::InvalidParameter(format!(
                        "node task ids must be disjoint and within 0..{n_tasks}"
                    )));
                }
                seen[t] = true;
            }
        }
    }

    let mut live = nodes;
    let mut intermediate_fronts = Vec::new();
    let mut rounds = Vec::new();
    let mut map_evals = 0u64;
    let mut loss_probe_evals = 0u64;
    let mut round_no = 0usize;

    while live.len() > 1 {
        round_no += 1;
        // Re-measure every live node's preference-weighted loss at its own
        // parameters, one probe per covered task.
        let probe_start = oracle.eval_count();
        for node in live.iter_mut() {
            let metric = node_metric(node, &node.coeffs, pref, oracle)?;
            node.loss = to_loss(metric, config.direction);
        }
        let round_probe_evals = oracle.eval_count() - probe_start;
        loss_probe_evals += round_probe_evals;
        let node_losses: Vec<f64> = live.iter().map(|n| n.loss).collect();

        // An odd pool carries the median-loss node over unmodified.
        let mut carried: Option<TaskNode> = None;
        let mut carried_tasks = None;
        if live.len() % 2 == 1 {
            let mut order: Vec<usize> = (0..live.len()).collect();
            order.sort_by(|&a, &b| {
                live[a]
                    .loss
                    .partial_cmp(&live[b].loss)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            let median = order[(order.len() - 1) / 2];
            let node = live.remove(median);
            carried_tasks = Some(node.task_ids.clone());
            carried = Some(node);
        }

        let mut steps = Vec::new();
        let mut next: Vec<TaskNode> = Vec::new();
        let mut pair_index = 0u64;
        while live.len() >= 2 {
            let (i, j) = pair_closest(&live)?;
            let right = live.remove(j);
            let left = live.remove(i);
            let pair_start = oracle.eval_count();

            let pair_oracle = PairOracle {
                inner: oracle,
                left: &left,
                right: &right,
                pref,
            };
            let link = {
                let combined: Vec<usize> = left
                    .task_ids
                    .iter()
                    .chain(&right.task_ids)
                    .copied()
                    .collect();
                node_link(&combined, &config.links)
            };
            let mut pair_seed_rng = indexed_substream(
                config.seed,
                "nested-pair",
                (round_no as u64) << 32 | pair_index,
            );
            use rand::Rng as _;
            let map_config = MapConfig {
                k_samples: config.per_pair_budget,
                sampling: SamplingScheme::UniformBox,
                bounds: vec![config.pair_bounds; 2],
                links: vec![link; 2],
                directions: vec![config.direction; 2],
                moop: config.moop,
                seed: pair_seed_rng.gen(),
                reevaluate_front: false,
            };
            let outcome = run_map(&map_config, &pair_oracle)?;
            let pair_pref = PreferenceVector::new(vec![
                left.task_ids.iter().map(|&t| pref.weights[t]).sum::<f64>(),
                right.task_ids.iter().map(|&t| pref.weights[t]).sum::<f64>(),
            ])
            .unwrap_or_else(|_| PreferenceVector::new(vec![1.0, 1.0]).expect("uniform"));
            let chosen = select_from_front(
                &outcome.front_predicted,
                &pair_pref,
                &[config.direction; 2],
            )?;

            let merged_params = {
                let columns = vec![
                    crate::model::ParameterVector(
                        left.params
                            .as_slice()
                            .iter()
                            .zip(pretrained.as_slice())
                            .map(|(p, pre)| p - pre)
                            .collect(),
                    ),
                    crate::model::ParameterVector(
                        right
                            .params
                            .as_slice()
                            .iter()
                            .zip(pretrained.as_slice())
                            .map(|(p, pre)| p - pre)
                            .collect(),
                    ),
                ];
                let deltas = TaskMatrix::new(columns)?;
                merge_model(pretrained, &deltas, &chosen)?
            };
            let merged_coeffs: Vec<f64> = left
                .coeffs
                .iter()
                .zip(&right.coeffs)
                .map(|(l, r)| chosen[0] * l + chosen[1] * r)
                .collect();
            let mut task_ids: Vec<usize> = left
                .task_ids
                .iter()
                .chain(&right.task_ids)
                .copied()
                .collect();
            task_ids.sort_unstable();

            let pair_map_evals = oracle.eval_count() - pair_start;
            map_evals += pair_map_evals;
            steps.push(MergeStep {
                round: round_no,
                left_tasks: left.task_ids.clone(),
                right_tasks: right.task_ids.clone(),
                chosen_c: chosen.clone(),
                front_size: outcome.front_predicted.len(),
                map_evals: pair_map_evals,
            });
            intermediate_fronts.push(outcome.front_predicted);
            next.push(TaskNode {
                task_ids,
                loss: 0.0,
                params: merged_params,
                coeffs: merged_coeffs,
            });
            pair_index += 1;
        }
        debug_assert!(live.is_empty());
        if let Some(node) = carried {
            next.push(node);
        }
        rounds.push(MergeRound {
            round: round_no,
            node_losses,
            carried_over: carried_tasks,
            loss_probe_evals: round_probe_evals,
            steps,
        });
        live = next;
    }

    let final_node = live.into_iter().next().expect("one node remains");
    Ok(NestedOutcome {
        final_params: final_node.params,
        final_coeffs: final_node.coeffs,
        intermediate_fronts,
        rounds,
        map_evals,
        loss_probe_evals,
        eval_count: map_evals + loss_probe_evals,
    })
}
