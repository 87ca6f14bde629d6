//! Amortized Pareto fronts for task-vector model merging.
//!
//! Merging fine-tuned models by task arithmetic turns on the choice of
//! scaling coefficients, and the best choice trades task metrics off against
//! each other. This crate estimates the whole trade-off surface from a small
//! evaluation budget: it fits per-task quadratic surrogates to sampled
//! metrics, searches the surrogates with a many-objective evolutionary
//! algorithm, and reports amortized Pareto fronts together with front
//! quality metrics (win rate, generational distances, preference-weighted
//! sums). Nested pairwise merging and Bayesian adaptive sampling variants
//! cut the budget further.
//!
//! ```
//! use mergefront::moop::Direction;
//! use mergefront::oracle::{generate_tradeoff_landscape, MetricRange, Oracle, SyntheticOracle};
//! use mergefront::pipeline::{run_map, MapConfig};
//!
//! // Two accuracy-like tasks whose optima conflict.
//! let link = MetricRange::Bounded { lower: 0.0, upper: 1.0 };
//! let landscape = generate_tradeoff_landscape(2, link, 0.0, 0.0, 42)?;
//! let oracle = SyntheticOracle::new(landscape, 42)?;
//!
//! // 30 evaluations buy the fits; the front costs only surrogate calls.
//! let config = MapConfig::new(
//!     30,
//!     vec![(0.0, 1.0); 2],
//!     vec![link; 2],
//!     vec![Direction::Maximize; 2],
//!     7,
//! );
//! let outcome = run_map(&config, &oracle)?;
//! assert!(outcome.front_predicted.len() > 1);
//! assert_eq!(oracle.eval_count(), outcome.eval_count);
//! # Ok::<(), mergefront::Error>(())
//! ```

pub mod bayes;
pub mod error;
pub mod metrics;
pub mod model;
pub mod moop;
pub mod nested;
pub mod oracle;
pub mod pipeline;
pub mod rng;
pub mod surrogate;

pub use error::{Error, Result};
