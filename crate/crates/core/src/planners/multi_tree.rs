//! Restarting variant: a sequence of independent trees under shrinking
//! cost ceilings.
//!
//! Each round grows a fresh tree with the cost-sampling ceiling fixed at the
//! current bound and every propagated node exceeding the bound rejected, so
//! the whole tree lives inside `X x [0, ceiling]`. The moment a round
//! reaches the goal, the round ends and the next ceiling becomes
//! `multi_shrink` times that solution's cost. A round that exhausts its
//! share of the budget (the total split evenly across `multi_max_rounds`)
//! without reaching the goal ends the run.

use crate::error::Result;
use crate::planners::single_tree::{EngineOptions, SingleTreeEngine};
use crate::planners::{
    build_solution, Improvement, PlanResult, PlanTree, PlannerParams, Problem, RunControl,
    StopCondition, Variant,
};
use crate::rng::RandomStream;
use crate::types::ControlSegment;

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
    let mut bundle = stream.bundle();
    let mut control = RunControl::new(stop, checkpoints);
    let rounds = params.multi_max_rounds.max(1) as u64;
    let share_iters = stop.iterations.map(|n| (n / rounds).max(1));
    let share_time = stop.time_s.map(|t| t / rounds as f64);

    let mut best: Option<Snapshot> = None;
    let mut improvements: Vec<Improvement> = Vec::new();
    let mut ceiling = params.c_max;
    let mut gi: u64 = 0; // global iteration counter, spans rounds
    let mut nodes_total: u64 = 0;
    let mut abandoned: u64 = 0; // nodes of discarded round trees
    let mut last_tree: Option<PlanTree> = None;
    let mut stopped = false;

    for _round in 0..rounds {
        let opts = EngineOptions {
            draw_cost: true,
            adaptive_ceiling: false,
            prune: false,
            fixed_ceiling: Some(ceiling),
            reject_cost_above: Some(ceiling),
        };
        let mut engine = SingleTreeEngine::new(problem, params, opts)?;
        if let Some(t) = &last_tree {
            abandoned += t.len() as u64;
        }
        let round_start_iter = gi;
        let round_start_time = control.elapsed_s();

        // The round ends at its first solution (the root counting if it is
        // already in the goal), at its budget share, or at the global stop.
        while engine.best.is_none() {
            if control.should_stop(gi) {
                stopped = true;
                break;
            }
            if let Some(si) = share_iters {
                if gi - round_start_iter >= si {
                    break;
                }
            }
            if let Some(st) = share_time {
                if gi % 64 == 0 && control.elapsed_s() - round_start_time >= st {
                    break;
                }
            }
            engine.step_grow(gi, &mut bundle);
            gi += 1;
            let shown = show_cost(&best, engine.best_cost());
            control.observe(gi, shown, engine.tree.live(), abandoned);
        }

        nodes_total += engine.tree.len() as u64;
        let round_best = engine.best;
        last_tree = Some(engine.tree);
        match round_best {
            Some(b) => {
                if best.as_ref().map_or(true, |s| b.cost < s.cost) {
                    let tree = last_tree.as_ref().expect("just assigned");
                    best = Some(Snapshot {
                        cost: b.cost,
                        schedule: tree.schedule(b.id),
                        iteration: b.iteration,
                    });
                    improvements.push(Improvement { iteration: b.iteration, cost: b.cost });
                }
                ceiling = params.multi_shrink * b.cost;
                if stopped || ceiling <= 0.0 {
                    break;
                }
            }
            None => break, // share exhausted without a solution: give up
        }
    }

    let tree = last_tree.expect("at least one round always runs");
    let best_cost = best.as_ref().map(|s| s.cost);
    control.finish(gi, best_cost, tree.live(), abandoned);
    tree.validate_bookkeeping()?;
    let solution = match best {
        Some(s) => Some(build_solution(problem, params, s.schedule, s.cost, s.iteration)?),
        None => None,
    };
    let result = PlanResult {
        variant: Variant::MultiTree,
        best: solution,
        iterations: gi,
        elapsed_s: control.elapsed_s(),
        nodes_live: tree.live() as u64,
        nodes_total,
        pruned: abandoned,
        improvements,
        checkpoints: control.records,
    };
    Ok((result, tree))
}

fn show_cost(best: &Option<Snapshot>, round_best: Option<f64>) -> Option<f64> {
    match (best.as_ref().map(|s| s.cost), round_best) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}
