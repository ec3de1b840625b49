//! SST: stable sparse tree planning with witness-based domination.
//!
//! Selection draws a target state (no cost target) and expands the
//! cheapest node within the best-near radius of it — falling back to the
//! nearest node when that neighborhood is empty. A sparse set of witnesses,
//! one per covered region of radius `delta_s`, accepts a new node only when
//! it beats the region's current representative on accumulated cost; the
//! beaten representative leaves the active set, and chains of inactive
//! leaves are deleted outright. Both radii are measured in normalized state
//! units: every axis is rescaled to `[0, 1]` by its bounds, so the deltas
//! mean the same thing across problems.
//!
//! The best solution is snapshotted (control schedule and all) the moment
//! it is found, because domination may later delete parts of the tree.

use rand::Rng;

use crate::dynamics::Integrator;
use crate::error::Result;
use crate::geometry::collision_free;
use crate::metric::MetricMap;
use crate::nn::NnIndex;
use crate::planners::tree::{EdgeInfo, PlanTree};
use crate::planners::{
    build_solution, sample_state_target, Improvement, PlanResult, PlannerParams, Problem,
    RunControl, StopCondition, Variant,
};
use crate::rng::{sample_box_into, RandomStream};
use crate::types::{AugmentedState, ControlSegment, Trajectory};

struct Witness {
    rep: u32,
    rep_cost: f64,
}

struct Snapshot {
    cost: f64,
    schedule: Vec<ControlSegment>,
    iteration: u64,
}

pub(crate) fn run(
    problem: &Problem,
    params: &PlannerParams,
    stop: &StopCondition,
    checkpoints: &[f64],
    stream: &RandomStream,
) -> Result<(PlanResult, PlanTree)> {
    let d = problem.system.state_dim();
    let bounds = &problem.system.state_bounds;
    let norm_scales: Vec<f64> =
        (0..d).map(|i| 1.0 / (bounds.max[i] - bounds.min[i])).collect();
    // Active tree nodes, indexed over normalized state space (costs are
    // carried but play no role in the metric).
    let mut node_nn = NnIndex::new(MetricMap::from_scales(norm_scales.clone()));
    // Witness points, same space.
    let mut wit_nn = NnIndex::new(MetricMap::from_scales(norm_scales));

    let root = AugmentedState::new(problem.x_init.clone(), 0.0);
    let mut tree = PlanTree::new(root);
    node_nn.insert(0, problem.x_init.as_slice(), 0.0);
    let mut active = vec![true];
    let mut witnesses = vec![Witness { rep: 0, rep_cost: 0.0 }];
    wit_nn.insert(0, problem.x_init.as_slice(), 0.0);

    let mut integ = Integrator::new(params.integrator_config()?);
    let mut bundle = stream.bundle();
    let mut control = RunControl::new(stop, checkpoints);

    let mut improvements: Vec<Improvement> = Vec::new();
    let mut best: Option<Snapshot> = None;
    if problem.goal.contains(problem.x_init.as_slice()) {
        best = Some(Snapshot { cost: 0.0, schedule: Vec::new(), iteration: 0 });
        improvements.push(Improvement { iteration: 0, cost: 0.0 });
    }
    let mut deleted: u64 = 0;

    // Scratch
    let mut xr: Vec<f64> = Vec::new();
    let mut ur: Vec<f64> = Vec::new();
    let mut ball: Vec<f64> = Vec::new();
    let mut candidates: Vec<u32> = Vec::new();
    let mut traj = Trajectory::empty(d);

    fn advance(
        i: &mut u64,
        control: &mut RunControl,
        best: &Option<Snapshot>,
        tree: &PlanTree,
        deleted: u64,
    ) {
        *i += 1;
        control.observe(*i, best.as_ref().map(|s| s.cost), tree.live(), deleted);
    }

    let mut i: u64 = 0;
    while !control.should_stop(i) {
        // Selection: cheapest active node near the target state.
        sample_state_target(
            &mut bundle,
            bounds,
            &problem.goal,
            params.goal_bias,
            &mut xr,
            &mut ball,
        );
        node_nn.within_radius_into(&xr, params.sst_delta_bn, &mut candidates);
        let near = if candidates.is_empty() {
            node_nn.nearest(&xr).expect("the root is always active").0
        } else {
            let mut pick = candidates[0];
            let mut pick_cost = tree.node(pick).y.c;
            for &c in &candidates[1..] {
                let cc = tree.node(c).y.c;
                if cc < pick_cost || (cc == pick_cost && c < pick) {
                    pick = c;
                    pick_cost = cc;
                }
            }
            pick
        };

        // Expansion: random duration and control.
        let tu: f64 = bundle.duration.random_range(0.0..1.0);
        let t = tu * params.t_prop;
        sample_box_into(&mut bundle.control, &problem.system.control_bounds, &mut ur);
        let y_new = match integ.propagate_augmented_into(
            &problem.system,
            &tree.node(near).y,
            &ur,
            t,
            &mut traj,
        ) {
            Ok(y) => y,
            Err(_) => {
                advance(&mut i, &mut control, &best, &tree, deleted);
                continue;
            }
        };
        if !collision_free(&problem.world, &traj, params.resolution) {
            advance(&mut i, &mut control, &best, &tree, deleted);
            continue;
        }

        // Domination check against the witness covering the new state.
        let (w, wd) = wit_nn.nearest(y_new.x.as_slice()).expect("at least one witness");
        let mut accepted: Option<u32> = None;
        if wd > params.sst_delta_s {
            // Uncovered region: the new node founds a new witness.
            let id = add_node(&mut tree, &mut node_nn, &mut active, near, &y_new, &traj);
            let wid = witnesses.len() as u32;
            witnesses.push(Witness { rep: id, rep_cost: y_new.c });
            wit_nn.insert(wid, y_new.x.as_slice(), 0.0);
            accepted = Some(id);
        } else {
            let wit = &mut witnesses[w as usize];
            if y_new.c < wit.rep_cost {
                // The new node dominates the region's representative.
                let id = add_node(&mut tree, &mut node_nn, &mut active, near, &y_new, &traj);
                let old = wit.rep;
                wit.rep = id;
                wit.rep_cost = y_new.c;
                active[old as usize] = false;
                node_nn.remove(old);
                deleted += delete_inactive_leaf_chain(&mut tree, &active, old);
                accepted = Some(id);
            }
        }

        if let Some(id) = accepted {
            if problem.goal.contains(y_new.x.as_slice())
                && best.as_ref().map_or(true, |s| y_new.c < s.cost)
            {
                best = Some(Snapshot {
                    cost: y_new.c,
                    schedule: tree.schedule(id),
                    iteration: i,
                });
                improvements.push(Improvement { iteration: i, cost: y_new.c });
            }
        }
        advance(&mut i, &mut control, &best, &tree, deleted);
    }

    control.finish(i, best.as_ref().map(|s| s.cost), tree.live(), deleted);
    tree.validate_bookkeeping()?;
    let solution = match best {
        Some(s) => Some(build_solution(problem, params, s.schedule, s.cost, s.iteration)?),
        None => None,
    };
    let result = PlanResult {
        variant: Variant::Sst,
        best: solution,
        iterations: i,
        elapsed_s: control.elapsed_s(),
        nodes_live: tree.live() as u64,
        nodes_total: tree.len() as u64,
        pruned: deleted,
        improvements,
        checkpoints: control.records,
    };
    Ok((result, tree))
}

fn add_node(
    tree: &mut PlanTree,
    node_nn: &mut NnIndex,
    active: &mut Vec<bool>,
    parent: u32,
    y: &AugmentedState,
    traj: &Trajectory,
) -> u32 {
    let edge = EdgeInfo { segment: traj.segments[0].clone(), cost: traj.cost };
    let id = tree.add_child(parent, y.clone(), edge);
    node_nn.insert(id, y.x.as_slice(), y.c);
    debug_assert_eq!(active.len(), id as usize);
    active.push(true);
    id
}

/// Starting from a just-deactivated node, delete it and walk up deleting
/// ancestors for as long as they are inactive leaves. Returns how many
/// nodes were deleted.
fn delete_inactive_leaf_chain(tree: &mut PlanTree, active: &[bool], start: u32) -> u64 {
    let mut n = 0;
    let mut cur = start;
    loop {
        let node = tree.node(cur);
        if !node.alive || active[cur as usize] || node.live_children > 0 {
            break;
        }
        let Some(parent) = node.parent else { break }; // never delete the root
        tree.mark_dead(cur);
        n += 1;
        cur = parent;
    }
    n
}
