//! The single-tree planner engine behind RRT, the augmented-space planner,
//! its pruning variant, and the hybrid.
//!
//! One iteration: draw a target point, pick the nearest tree node under the
//! weighted metric, draw a duration and a constant control, propagate, and
//! keep the new node if its whole trajectory is collision-free. The engine
//! differs across variants only in configuration:
//!
//! - plain RRT draws no target cost and its metric ignores the cost axis
//!   (zero cost weight), so it is the classical kinodynamic RRT;
//! - the augmented-space planner draws a target cost from `[0, ceiling)`
//!   and selects neighbors in the joint metric — structurally it *is* RRT
//!   run on the system extended with the cost as one more state coordinate,
//!   and a generic-RRT harness fed that extended system reproduces its tree
//!   bit for bit;
//! - the pruning variant additionally deletes every node whose accumulated
//!   cost exceeds the best goal-reaching cost;
//! - the hybrid replaces every odd iteration's selection by an exploration
//!   heuristic proposal, leaving even iterations untouched.
//!
//! Draw order within an iteration is part of the reproducibility contract:
//! target state, target cost, duration, control — each from its own
//! substream.

use rand::Rng;

use crate::dynamics::Integrator;
use crate::error::Result;
use crate::geometry::collision_free;
use crate::metric::{MetricMap, MetricWeights};
use crate::nn::NnIndex;
use crate::planners::pln::PlnStrategy;
use crate::planners::tree::{EdgeInfo, PlanTree};
use crate::planners::{
    build_solution, sample_state_target, Improvement, PlanResult, PlannerParams, Problem,
    RunControl, StopCondition, Variant,
};
use crate::rng::{sample_box_into, RandomStream, StreamBundle};
use crate::types::{AugmentedState, Trajectory};

/// How the engine behaves for a given variant.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EngineOptions {
    /// Draw a target cost each iteration (false for plain RRT, which also
    /// runs with zero cost weight in its metric).
    pub draw_cost: bool,
    /// Let the cost-sampling ceiling track tree growth / the best solution.
    pub adaptive_ceiling: bool,
    /// Remove nodes costlier than the best solution whenever it improves.
    pub prune: bool,
    /// Fixed cost-sampling ceiling, overriding `c_max`/adaptivity
    /// (used by the multi-tree rounds).
    pub fixed_ceiling: Option<f64>,
    /// Reject any propagated node with accumulated cost above this.
    pub reject_cost_above: Option<f64>,
}

impl EngineOptions {
    pub fn for_variant(variant: Variant, params: &PlannerParams) -> Self {
        match variant {
            Variant::Rrt => Self {
                draw_cost: false,
                adaptive_ceiling: false,
                prune: false,
                fixed_ceiling: None,
                reject_cost_above: None,
            },
            Variant::AoRrt => Self {
                draw_cost: true,
                adaptive_ceiling: params.adaptive_c_max,
                prune: false,
                fixed_ceiling: None,
                reject_cost_above: None,
            },
            Variant::AoRrtPrune | Variant::Hybrid => Self {
                draw_cost: true,
                adaptive_ceiling: params.adaptive_c_max,
                prune: true,
                fixed_ceiling: None,
                reject_cost_above: None,
            },
            Variant::MultiTree | Variant::Sst => {
                unreachable!("variant {variant} does not run on the single-tree engine")
            }
        }
    }
}

/// The current best goal-reaching node.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BestNode {
    pub id: u32,
    pub cost: f64,
    pub iteration: u64,
}

pub(crate) enum StepOutcome {
    /// A node was added.
    Added(u32),
    /// A node was added and strictly improved the best solution; any nodes
    /// pruned as a consequence are in `last_pruned`.
    Improved(u32),
    /// The expansion was rejected (collision, divergence, or cost cap).
    Rejected,
}

pub(crate) struct SingleTreeEngine<'p> {
    problem: &'p Problem,
    params: &'p PlannerParams,
    opts: EngineOptions,
    integ: Integrator,
    pub tree: PlanTree,
    pub nn: NnIndex,
    pub best: Option<BestNode>,
    pub improvements: Vec<Improvement>,
    pub pruned: u64,
    /// Nodes removed by the most recent improvement's prune sweep.
    pub last_pruned: Vec<u32>,
    tree_max_cost: f64,
    // Per-iteration scratch, allocated once.
    xr: Vec<f64>,
    ur: Vec<f64>,
    q: Vec<f64>,
    ball: Vec<f64>,
    traj: Trajectory,
}

impl<'p> SingleTreeEngine<'p> {
    pub fn new(problem: &'p Problem, params: &'p PlannerParams, opts: EngineOptions) -> Result<Self> {
        let d = problem.system.state_dim();
        // Variants that never draw a target cost (plain RRT) must also not
        // let stored costs influence selection, or the zero appended to each
        // query would pull every search toward the root.
        let weights = if opts.draw_cost {
            params.weights
        } else {
            MetricWeights::new(params.weights.w_x, 0.0)?
        };
        let map = MetricMap::for_weights(d, weights)?;
        let mut nn = NnIndex::new(map);
        let root = AugmentedState::new(problem.x_init.clone(), 0.0);
        let mut q = root.to_vec();
        nn.insert(0, &q, 0.0);
        let tree = PlanTree::new(root);
        let mut engine = Self {
            problem,
            params,
            opts,
            integ: Integrator::new(params.integrator_config()?),
            tree,
            nn,
            best: None,
            improvements: Vec::new(),
            pruned: 0,
            last_pruned: Vec::new(),
            tree_max_cost: 0.0,
            xr: Vec::with_capacity(d),
            ur: Vec::new(),
            q: Vec::with_capacity(d + 1),
            ball: Vec::new(),
            traj: Trajectory::empty(d),
        };
        q.clear();
        engine.q = q;
        if problem.goal.contains(problem.x_init.as_slice()) {
            engine.best = Some(BestNode { id: 0, cost: 0.0, iteration: 0 });
            engine.improvements.push(Improvement { iteration: 0, cost: 0.0 });
        }
        Ok(engine)
    }

    pub fn best_cost(&self) -> Option<f64> {
        self.best.map(|b| b.cost)
    }

    /// Cost-sampling ceiling for this iteration: fixed for multi-tree
    /// rounds; under adaptivity, the best solution cost once one exists and
    /// the largest tree cost before that; otherwise the configured maximum.
    fn cost_ceiling(&self) -> f64 {
        if let Some(f) = self.opts.fixed_ceiling {
            return f;
        }
        if self.opts.adaptive_ceiling {
            if let Some(b) = &self.best {
                return b.cost;
            }
            if self.tree_max_cost > 0.0 {
                return self.tree_max_cost;
            }
        }
        self.params.c_max
    }

    /// One tree-growth iteration: target draw, nearest selection, random
    /// propagation.
    pub fn step_grow(&mut self, i: u64, bundle: &mut StreamBundle) -> StepOutcome {
        sample_state_target(
            bundle,
            &self.problem.system.state_bounds,
            &self.problem.goal,
            self.params.goal_bias,
            &mut self.xr,
            &mut self.ball,
        );
        let c_rand = if self.opts.draw_cost {
            let u: f64 = bundle.cost.random_range(0.0..1.0);
            u * self.cost_ceiling()
        } else {
            0.0
        };
        self.q.clear();
        self.q.extend_from_slice(&self.xr);
        self.q.push(c_rand);
        let (near, _) = self.nn.nearest(&self.q).expect("tree always has a live root");
        let tu: f64 = bundle.duration.random_range(0.0..1.0);
        let t = tu * self.params.t_prop;
        sample_box_into(&mut bundle.control, &self.problem.system.control_bounds, &mut self.ur);
        self.expand(near, t, i)
    }

    /// One exploration iteration: the strategy picks the node; duration and
    /// control come from the strategy's own substream.
    pub fn step_explore(
        &mut self,
        i: u64,
        bundle: &mut StreamBundle,
        pln: &mut dyn PlnStrategy,
    ) -> StepOutcome {
        let Some(near) = pln.propose(&self.tree, &mut bundle.pln) else {
            return StepOutcome::Rejected;
        };
        let tu: f64 = bundle.pln.random_range(0.0..1.0);
        let t = tu * self.params.t_prop;
        sample_box_into(&mut bundle.pln, &self.problem.system.control_bounds, &mut self.ur);
        self.expand(near, t, i)
    }

    /// Propagate from `near` with the already-drawn duration and control
    /// (in `self.ur`), and insert the result if valid.
    fn expand(&mut self, near: u32, t: f64, i: u64) -> StepOutcome {
        let problem = self.problem;
        let y_new = match self.integ.propagate_augmented_into(
            &problem.system,
            &self.tree.node(near).y,
            &self.ur,
            t,
            &mut self.traj,
        ) {
            Ok(y) => y,
            Err(_) => return StepOutcome::Rejected, // diverged
        };
        if let Some(cap) = self.opts.reject_cost_above {
            if y_new.c > cap {
                return StepOutcome::Rejected;
            }
        }
        if !collision_free(&problem.world, &self.traj, self.params.resolution) {
            return StepOutcome::Rejected;
        }
        let edge = EdgeInfo { segment: self.traj.segments[0].clone(), cost: self.traj.cost };
        let id = self.tree.add_child(near, y_new.clone(), edge);
        self.q.clear();
        self.q.extend_from_slice(y_new.x.as_slice());
        self.q.push(y_new.c);
        self.nn.insert(id, &self.q, y_new.c);
        if y_new.c > self.tree_max_cost {
            self.tree_max_cost = y_new.c;
        }

        let improved = problem.goal.contains(y_new.x.as_slice())
            && self.best.map_or(true, |b| y_new.c < b.cost);
        if !improved {
            return StepOutcome::Added(id);
        }
        self.best = Some(BestNode { id, cost: y_new.c, iteration: i });
        self.improvements.push(Improvement { iteration: i, cost: y_new.c });
        self.last_pruned.clear();
        if self.opts.prune {
            self.tree.prune_above(y_new.c, &mut self.last_pruned);
            for &rid in &self.last_pruned {
                self.nn.remove(rid);
            }
            self.pruned += self.last_pruned.len() as u64;
        }
        StepOutcome::Improved(id)
    }

    /// Assemble the run outcome; consumes the engine's bookkeeping.
    fn into_result(
        self,
        variant: Variant,
        control: RunControl,
        iterations: u64,
    ) -> Result<(PlanResult, PlanTree)> {
        self.tree.validate_bookkeeping()?;
        let best = match self.best {
            Some(b) => Some(build_solution(
                self.problem,
                self.params,
                self.tree.schedule(b.id),
                b.cost,
                b.iteration,
            )?),
            None => None,
        };
        let result = PlanResult {
            variant,
            best,
            iterations,
            elapsed_s: control.elapsed_s(),
            nodes_live: self.tree.live() as u64,
            nodes_total: self.tree.len() as u64,
            pruned: self.pruned,
            improvements: self.improvements,
            checkpoints: control.records,
        };
        Ok((result, self.tree))
    }
}

/// Run RRT / the augmented-space planner / its pruning variant.
pub(crate) fn run(
    problem: &Problem,
    variant: Variant,
    params: &PlannerParams,
    stop: &StopCondition,
    checkpoints: &[f64],
    stream: &RandomStream,
) -> Result<(PlanResult, PlanTree)> {
    let opts = EngineOptions::for_variant(variant, params);
    let mut bundle = stream.bundle();
    let mut engine = SingleTreeEngine::new(problem, params, opts)?;
    let mut control = RunControl::new(stop, checkpoints);
    let mut i: u64 = 0;
    while !control.should_stop(i) {
        engine.step_grow(i, &mut bundle);
        i += 1;
        control.observe(i, engine.best_cost(), engine.tree.live(), engine.pruned);
    }
    control.finish(i, engine.best_cost(), engine.tree.live(), engine.pruned);
    engine.into_result(variant, control, i)
}

/// Run the hybrid with the standard occupancy-grid heuristic (via
/// [`plan`](crate::planners::plan)) or any custom [`PlnStrategy`].
///
/// Even iterations grow the tree exactly like the pruning planner; odd
/// iterations expand the strategy's proposal. A strategy that never
/// proposes yields a planner whose even iterations replay the pruning
/// planner's run draw for draw.
pub fn plan_hybrid_with(
    problem: &Problem,
    params: &PlannerParams,
    stop: &StopCondition,
    checkpoints: &[f64],
    stream: &RandomStream,
    pln: &mut dyn PlnStrategy,
) -> Result<(PlanResult, PlanTree)> {
    problem.validate()?;
    params.validate()?;
    stop.validate()?;
    super::validate_checkpoints(checkpoints)?;
    run_hybrid(problem, params, stop, checkpoints, stream, pln)
}

pub(crate) fn run_hybrid(
    problem: &Problem,
    params: &PlannerParams,
    stop: &StopCondition,
    checkpoints: &[f64],
    stream: &RandomStream,
    pln: &mut dyn PlnStrategy,
) -> Result<(PlanResult, PlanTree)> {
    let opts = EngineOptions::for_variant(Variant::Hybrid, params);
    let mut bundle = stream.bundle();
    let mut engine = SingleTreeEngine::new(problem, params, opts)?;
    pln.register(0, &engine.tree.node(0).y);
    let mut control = RunControl::new(stop, checkpoints);
    let mut i: u64 = 0;
    while !control.should_stop(i) {
        let outcome = if i % 2 == 1 {
            engine.step_explore(i, &mut bundle, pln)
        } else {
            engine.step_grow(i, &mut bundle)
        };
        match outcome {
            StepOutcome::Added(id) => pln.register(id, &engine.tree.node(id).y),
            StepOutcome::Improved(id) => {
                pln.register(id, &engine.tree.node(id).y);
                for &rid in &engine.last_pruned {
                    pln.unregister(rid, &engine.tree.node(rid).y);
                }
            }
            StepOutcome::Rejected => {}
        }
        i += 1;
        control.observe(i, engine.best_cost(), engine.tree.live(), engine.pruned);
    }
    control.finish(i, engine.best_cost(), engine.tree.live(), engine.pruned);
    engine.into_result(Variant::Hybrid, control, i)
}
