//! Kinodynamic sampling-based motion planning in state–cost space.
//!
//! The central planner grows a single tree over the augmented space
//! `Y = X x [0, inf)`: each node carries a state together with the cost
//! accumulated to reach it, nearest-neighbor queries use a weighted metric
//! over both, and random cost targets bias growth toward cheap paths. As
//! the tree densifies, the best goal-reaching cost converges toward the
//! optimum — asymptotic optimality from an algorithm with RRT's per-
//! iteration price. Baselines (plain RRT, SST, a multi-tree variant, and a
//! hybrid with an exploration heuristic) and a deterministic benchmark
//! harness round out the crate.

pub mod bench;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod metric;
pub mod nn;
pub mod oracle;
pub mod planners;
pub mod rng;
pub mod scenario;
pub mod types;

pub use error::{Error, Result};
