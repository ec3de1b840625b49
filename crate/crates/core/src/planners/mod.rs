//! Sampling-based kinodynamic planners over the augmented state–cost space.
//!
//! All planners share the same machinery: a tree of augmented states with
//! exact cost bookkeeping ([`tree::PlanTree`]), a scaled-Euclidean
//! nearest-neighbor index, deterministic substreams for every kind of random
//! draw, and RK4 propagation that integrates cost alongside the state.
//!
//! Variants:
//! - [`Variant::Rrt`] — plain kinodynamic RRT; nearest-neighbor search
//!   ignores cost and no cost targets are drawn.
//! - [`Variant::AoRrt`] — the central planner: samples a target cost along
//!   with the target state and selects neighbors in the weighted augmented
//!   metric, which steers growth toward cheap paths and makes the best
//!   reachable cost converge as the tree densifies.
//! - [`Variant::AoRrtPrune`] — same, plus removal of every node whose
//!   accumulated cost exceeds the best goal-reaching cost found so far.
//! - [`Variant::MultiTree`] — a restarting variant: each round grows a
//!   fresh tree under a fixed cost ceiling and the ceiling shrinks to each
//!   round's solution cost.
//! - [`Variant::Hybrid`] — alternates tree-growth iterations with an
//!   exploration heuristic that expands nodes from under-visited regions.
//! - [`Variant::Sst`] — SST: best-near selection plus witness-based
//!   domination pruning; asymptotically near-optimal on its own.

pub mod generic;
mod multi_tree;
pub mod pln;
mod single_tree;
mod sst;
pub mod tree;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Integrator, IntegratorConfig, SystemDefinition};
use crate::error::{Error, Result};
use crate::geometry::ObstacleSet;
use crate::metric::MetricWeights;
use crate::rng::{sample_ball, sample_box_into, RandomStream, StreamBundle};
use crate::types::{AugmentedState, Bounds, ControlSegment, GoalRegion, State, Trajectory};

pub use pln::{GridPln, NoopPln, PlnStrategy};
pub use single_tree::plan_hybrid_with;
pub use tree::{EdgeInfo, PlanTree, TreeNode};

/// Which planner to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Rrt,
    AoRrt,
    AoRrtPrune,
    MultiTree,
    Hybrid,
    Sst,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Rrt,
        Variant::AoRrt,
        Variant::AoRrtPrune,
        Variant::MultiTree,
        Variant::Hybrid,
        Variant::Sst,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Rrt => "rrt",
            Variant::AoRrt => "ao-rrt",
            Variant::AoRrtPrune => "ao-rrt-prune",
            Variant::MultiTree => "multi-tree",
            Variant::Hybrid => "hybrid",
            Variant::Sst => "sst",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .iter()
            .copied()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Variant::ALL.iter().map(|v| v.as_str()).collect();
                Error::Parameter(format!(
                    "unknown planner `{s}`; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Everything a planner needs to know about the problem instance.
#[derive(Debug, Clone)]
pub struct Problem {
    pub system: SystemDefinition,
    pub world: ObstacleSet,
    pub x_init: State,
    pub goal: GoalRegion,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        let d = self.system.state_dim();
        if self.x_init.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.x_init.dim() });
        }
        if self.world.bounds.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.world.bounds.dim() });
        }
        if self.world.bounds != self.system.state_bounds {
            return Err(Error::InvalidScenario {
                field: "bounds".into(),
                reason: "workspace bounds must equal the system's state bounds".into(),
            });
        }
        for &ax in &self.goal.projection {
            if ax >= d {
                return Err(Error::InvalidScenario {
                    field: "goal.projection".into(),
                    reason: format!("axis {ax} out of range for state dim {d}"),
                });
            }
        }
        if !self.world.is_free(self.x_init.as_slice()) {
            return Err(Error::InvalidScenario {
                field: "x_init".into(),
                reason: "initial state is not in free space".into(),
            });
        }
        Ok(())
    }
}

/// Tuning knobs shared by all planner variants. Fields a given variant does
/// not use are simply ignored by it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PlannerParams {
    /// Upper bound on a single propagation's duration; durations are drawn
    /// uniformly from `[0, t_prop)`.
    pub t_prop: f64,
    /// Cost-sampling ceiling: target costs are drawn from `[0, c_max)`.
    /// With `adaptive_c_max`, this is only the initial/fallback value.
    pub c_max: f64,
    /// Metric weights for nearest-neighbor search in augmented space.
    pub weights: MetricWeights,
    /// Collision-check spacing along propagated trajectories (time units).
    pub resolution: f64,
    /// RK4 integration step.
    pub step: f64,
    /// Probability of drawing the state target from the goal region.
    pub goal_bias: f64,
    /// Replace the fixed `c_max` ceiling by the largest tree cost before a
    /// solution exists and by the best solution cost after.
    pub adaptive_c_max: bool,
    /// SST: radius of the best-near selection neighborhood, in normalized
    /// state units (each axis scaled to `[0, 1]` by its bounds).
    pub sst_delta_bn: f64,
    /// SST: witness spacing radius, in normalized state units.
    pub sst_delta_s: f64,
    /// Multi-tree: next round's cost ceiling as a fraction of the current
    /// round's solution cost.
    pub multi_shrink: f64,
    /// Multi-tree: maximum number of restarts; the iteration/time budget is
    /// split evenly across them.
    pub multi_max_rounds: u32,
    /// Hybrid: occupancy-grid resolution per axis for the exploration
    /// heuristic.
    pub pln_bins: u32,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            t_prop: 1.0,
            c_max: 10.0,
            weights: MetricWeights::default(),
            resolution: 0.02,
            step: 0.02,
            goal_bias: 0.05,
            adaptive_c_max: true,
            sst_delta_bn: 0.2,
            sst_delta_s: 0.1,
            multi_shrink: 1.0,
            multi_max_rounds: 10,
            pln_bins: 8,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t_prop", self.t_prop),
            ("c_max", self.c_max),
            ("resolution", self.resolution),
            ("step", self.step),
            ("sst_delta_bn", self.sst_delta_bn),
            ("sst_delta_s", self.sst_delta_s),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Parameter(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return Err(Error::Parameter(format!(
                "goal_bias must be in [0, 1], got {}",
                self.goal_bias
            )));
        }
        if !self.multi_shrink.is_finite() || self.multi_shrink <= 0.0 || self.multi_shrink > 1.0 {
            return Err(Error::Parameter(format!(
                "multi_shrink must be in (0, 1], got {}",
                self.multi_shrink
            )));
        }
        if self.multi_max_rounds == 0 {
            return Err(Error::Parameter("multi_max_rounds must be >= 1".into()));
        }
        if self.pln_bins < 2 {
            return Err(Error::Parameter("pln_bins must be >= 2".into()));
        }
        self.weights.validate()
    }

    pub(crate) fn integrator_config(&self) -> Result<IntegratorConfig> {
        IntegratorConfig::new(self.step, self.t_prop)
    }
}

/// When a planner run ends. At least one bound must be set; with both, the
/// earlier one wins. Wallclock is sampled every 64 iterations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Default)]
#[serde(default)]
pub struct StopCondition {
    pub iterations: Option<u64>,
    pub time_s: Option<f64>,
}

impl StopCondition {
    pub fn iterations(n: u64) -> Self {
        Self { iterations: Some(n), time_s: None }
    }

    pub fn time_s(t: f64) -> Self {
        Self { iterations: None, time_s: Some(t) }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.iterations, self.time_s) {
            (None, None) => Err(Error::Parameter(
                "stop condition needs an iteration or time bound".into(),
            )),
            (Some(0), _) => Err(Error::Parameter("iteration bound must be >= 1".into())),
            (_, Some(t)) if !(t > 0.0) || !t.is_finite() => {
                Err(Error::Parameter(format!("time bound must be > 0, got {t}")))
            }
            _ => Ok(()),
        }
    }

    /// Checkpoints are interpreted in seconds when a time bound is the
    /// primary budget, in iterations otherwise.
    pub fn time_primary(&self) -> bool {
        self.time_s.is_some()
    }
}

/// Snapshot of planner progress at a configured checkpoint.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CheckpointRecord {
    /// The configured checkpoint value (iterations or seconds).
    pub checkpoint: f64,
    /// Iterations completed when the snapshot was taken.
    pub iterations: u64,
    pub best_cost: Option<f64>,
    pub nodes: u64,
    pub pruned: u64,
}

/// One strict improvement of the best goal-reaching cost.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Improvement {
    pub iteration: u64,
    pub cost: f64,
}

/// A goal-reaching plan: the exact control schedule, its replayed
/// trajectory, and the accumulated cost (bit-identical between the tree
/// bookkeeping and the replay).
#[derive(Debug, Clone)]
pub struct Solution {
    pub cost: f64,
    pub found_iteration: u64,
    pub schedule: Vec<ControlSegment>,
    pub trajectory: Trajectory,
    pub goal_distance: f64,
}

/// Outcome of one planner run.
#[derive(Debug, Clone)]
pub struct PlanResult {
    pub variant: Variant,
    pub best: Option<Solution>,
    pub iterations: u64,
    pub elapsed_s: f64,
    /// Live node count at the end of the run (last round's tree for the
    /// multi-tree variant).
    pub nodes_live: u64,
    /// Every node ever created, pruned/deleted ones included.
    pub nodes_total: u64,
    /// Nodes removed by pruning or domination.
    pub pruned: u64,
    pub improvements: Vec<Improvement>,
    pub checkpoints: Vec<CheckpointRecord>,
}

/// Run a planner to its stop condition. See [`plan_with_tree`] for the
/// tree-returning variant used by diagnostics and tests.
pub fn plan(
    problem: &Problem,
    variant: Variant,
    params: &PlannerParams,
    stop: &StopCondition,
    checkpoints: &[f64],
    stream: &RandomStream,
) -> Result<PlanResult> {
    plan_with_tree(problem, variant, params, stop, checkpoints, stream).map(|(r, _)| r)
}

/// [`plan`], also returning the final search tree (the last round's tree
/// for the multi-tree variant).
pub fn plan_with_tree(
    problem: &Problem,
    variant: Variant,
    params: &PlannerParams,
    stop: &StopCondition,
    checkpoints: &[f64],
    stream: &RandomStream,
) -> Result<(PlanResult, PlanTree)> {
    problem.validate()?;
    params.validate()?;
    stop.validate()?;
    validate_checkpoints(checkpoints)?;
    match variant {
        Variant::Rrt | Variant::AoRrt | Variant::AoRrtPrune => {
            single_tree::run(problem, variant, params, stop, checkpoints, stream)
        }
        Variant::Hybrid => {
            let mut pln = GridPln::new(&problem.system.state_bounds, params.c_max, params.pln_bins as usize);
            single_tree::run_hybrid(problem, params, stop, checkpoints, stream, &mut pln)
        }
        Variant::MultiTree => multi_tree::run(problem, params, stop, checkpoints, stream),
        Variant::Sst => sst::run(problem, params, stop, checkpoints, stream),
    }
}

pub(crate) fn validate_checkpoints(checkpoints: &[f64]) -> Result<()> {
    for w in checkpoints.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Parameter(format!(
                "checkpoints must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if let Some(&c) = checkpoints.first() {
        if !(c > 0.0) {
            return Err(Error::Parameter(format!("checkpoints must be > 0, got {c}")));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shared run plumbing
// ---------------------------------------------------------------------------

/// Budget tracking and checkpoint recording shared by all planner loops.
/// Wallclock is consulted only every 64 iterations so that iteration-bounded
/// runs make no timing syscalls in the hot loop.
pub(crate) struct RunControl {
    start: Instant,
    max_iterations: u64,
    deadline_s: Option<f64>,
    time_mode: bool,
    checkpoints: Vec<f64>,
    next_cp: usize,
    pub records: Vec<CheckpointRecord>,
}

impl RunControl {
    pub fn new(stop: &StopCondition, checkpoints: &[f64]) -> Self {
        Self {
            start: Instant::now(),
            max_iterations: stop.iterations.unwrap_or(u64::MAX),
            deadline_s: stop.time_s,
            time_mode: stop.time_primary(),
            checkpoints: checkpoints.to_vec(),
            next_cp: 0,
            records: Vec::with_capacity(checkpoints.len()),
        }
    }

    /// Whether to stop before starting iteration `i` (0-based).
    pub fn should_stop(&self, i: u64) -> bool {
        if i >= self.max_iterations {
            return true;
        }
        if let Some(d) = self.deadline_s {
            if i % 64 == 0 && self.elapsed_s() >= d {
                return true;
            }
        }
        false
    }

    /// Record any checkpoints that became due after `done` iterations.
    pub fn observe(&mut self, done: u64, best_cost: Option<f64>, nodes: usize, pruned: u64) {
        if self.next_cp >= self.checkpoints.len() {
            return;
        }
        if self.time_mode {
            if done % 64 != 0 {
                return;
            }
            let el = self.elapsed_s();
            while self.next_cp < self.checkpoints.len() && self.checkpoints[self.next_cp] <= el {
                self.push_record(done, best_cost, nodes, pruned);
            }
        } else {
            while self.next_cp < self.checkpoints.len()
                && self.checkpoints[self.next_cp] <= done as f64
            {
                self.push_record(done, best_cost, nodes, pruned);
            }
        }
    }

    /// Fill any checkpoints the run never reached with the final snapshot,
    /// so every configured checkpoint appears in the output exactly once.
    pub fn finish(&mut self, done: u64, best_cost: Option<f64>, nodes: usize, pruned: u64) {
        while self.next_cp < self.checkpoints.len() {
            self.push_record(done, best_cost, nodes, pruned);
        }
    }

    fn push_record(&mut self, done: u64, best_cost: Option<f64>, nodes: usize, pruned: u64) {
        self.records.push(CheckpointRecord {
            checkpoint: self.checkpoints[self.next_cp],
            iterations: done,
            best_cost,
            nodes: nodes as u64,
            pruned,
        });
        self.next_cp += 1;
    }

    pub fn elapsed_s(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Draw the iteration's target state: usually uniform over the bounds, but
/// with probability `goal_bias` a state whose goal-projected coordinates lie
/// uniformly inside the goal ball (remaining coordinates stay uniform).
/// All goal-bias randomness comes from the dedicated goal substream, so a
/// zero bias leaves the other streams' sequences untouched.
pub(crate) fn sample_state_target(
    bundle: &mut StreamBundle,
    bounds: &Bounds,
    goal: &GoalRegion,
    goal_bias: f64,
    out: &mut Vec<f64>,
    ball_scratch: &mut Vec<f64>,
) {
    use rand::Rng;
    if goal_bias > 0.0 {
        let coin: f64 = bundle.goal.random_range(0.0..1.0);
        if coin < goal_bias {
            sample_box_into(&mut bundle.goal, bounds, out);
            sample_ball(&mut bundle.goal, &goal.center, goal.radius, ball_scratch);
            for (i, &ax) in goal.projection.iter().enumerate() {
                out[ax] = ball_scratch[i];
            }
            return;
        }
    }
    sample_box_into(&mut bundle.state, bounds, out);
}

/// Rebuild a solution from its control schedule by bit-exact replay from the
/// initial state, verifying that the replayed accumulated cost matches the
/// tree's bookkeeping to the last bit and that the endpoint is in the goal.
pub(crate) fn build_solution(
    problem: &Problem,
    params: &PlannerParams,
    schedule: Vec<ControlSegment>,
    expected_cost: f64,
    found_iteration: u64,
) -> Result<Solution> {
    let d = problem.system.state_dim();
    let mut integ = Integrator::new(params.integrator_config()?);
    let mut y = AugmentedState::new(problem.x_init.clone(), 0.0);
    let mut total = Trajectory::empty(d);
    total.reset(problem.x_init.as_slice());
    let mut seg_traj = Trajectory::empty(d);
    for seg in &schedule {
        y = integ.propagate_augmented_into(
            &problem.system,
            &y,
            seg.control.as_slice(),
            seg.duration,
            &mut seg_traj,
        )?;
        total.concat(&seg_traj)?;
    }
    if y.c.to_bits() != expected_cost.to_bits() {
        return Err(Error::Parameter(format!(
            "schedule replay produced cost {} but the tree recorded {expected_cost}",
            y.c
        )));
    }
    let goal_distance = problem.goal.project_to_goal_distance(y.x.as_slice());
    if !problem.goal.contains(y.x.as_slice()) {
        return Err(Error::Parameter(format!(
            "schedule replay ended outside the goal (distance {goal_distance} > radius {})",
            problem.goal.radius
        )));
    }
    Ok(Solution {
        cost: expected_cost,
        found_iteration,
        schedule,
        trajectory: total,
        goal_distance,
    })
}
