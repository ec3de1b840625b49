//! A generic RRT harness with injectable sampling and extension.
//!
//! This engine knows nothing about costs, goals, or pruning: it grows a
//! tree over abstract points by repeatedly sampling a target, picking the
//! nearest stored point under a scaled Euclidean metric, and asking an
//! extension callback for a successor. Feeding it the *extended* system —
//! state plus one extra coordinate integrating the cost rate, targets drawn
//! uniformly over `X x [0, c_max]` — reproduces the augmented-space
//! planner's tree bit for bit ([`rrt_on_augmented_system`]), which is the
//! point: that planner is exactly generic RRT on a bigger system.

use rand::Rng as _;

use crate::dynamics::Integrator;
use crate::error::Result;
use crate::geometry::collision_free;
use crate::metric::MetricMap;
use crate::nn::NnIndex;
use crate::planners::tree::{EdgeInfo, PlanTree};
use crate::planners::{PlannerParams, Problem};
use crate::rng::{sample_box_into, RandomStream, StreamBundle};
use crate::types::{AugmentedState, Trajectory};

/// The tree grown by the generic harness: flat points with parent links and
/// whatever edge data the extension callback returned.
#[derive(Debug, Clone)]
pub struct GenericTree {
    pub points: Vec<Vec<f64>>,
    pub parents: Vec<Option<u32>>,
    pub edges: Vec<Option<EdgeInfo>>,
}

impl GenericTree {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Grow a tree for `iterations` rounds. `sample` fills the target point;
/// `extend` receives the nearest stored point and returns the new point
/// plus edge data, or `None` to reject the round.
pub fn grow_generic_rrt<S, E>(
    root: Vec<f64>,
    map: MetricMap,
    iterations: u64,
    bundle: &mut StreamBundle,
    mut sample: S,
    mut extend: E,
) -> GenericTree
where
    S: FnMut(&mut StreamBundle, &mut Vec<f64>),
    E: FnMut(&[f64], &mut StreamBundle) -> Option<(Vec<f64>, EdgeInfo)>,
{
    let mut nn = NnIndex::new(map);
    nn.insert(0, &root, *root.last().expect("points are non-empty"));
    let mut tree =
        GenericTree { points: vec![root], parents: vec![None], edges: vec![None] };
    let mut q: Vec<f64> = Vec::new();
    for _ in 0..iterations {
        sample(bundle, &mut q);
        let (near, _) = nn.nearest(&q).expect("tree always has its root");
        let extended = extend(&tree.points[near as usize], bundle);
        if let Some((p, e)) = extended {
            let id = tree.points.len() as u32;
            nn.insert(id, &p, *p.last().expect("points are non-empty"));
            tree.points.push(p);
            tree.parents.push(Some(near));
            tree.edges.push(Some(e));
        }
    }
    tree
}

/// Generic RRT over the extended system `F(y, u) = (f(x, u), g(x, u))` on
/// `Y = X x [0, c_max]`: the harness never learns that the last coordinate
/// is a cost, yet grows the augmented-space planner's tree exactly, draw
/// for draw (compare with [`compare_trees`]). Run the planner being
/// compared with zero goal bias and a non-adaptive ceiling, since this
/// harness has no goal or solution concept.
pub fn rrt_on_augmented_system(
    problem: &Problem,
    params: &PlannerParams,
    iterations: u64,
    stream: &RandomStream,
) -> Result<GenericTree> {
    problem.validate()?;
    params.validate()?;
    let d = problem.system.state_dim();
    let map = MetricMap::for_weights(d, params.weights)?;
    let mut bundle = stream.bundle();
    let mut integ = Integrator::new(params.integrator_config()?);
    let mut ur: Vec<f64> = Vec::new();
    let mut traj = Trajectory::empty(d);
    let system = &problem.system;
    let world = &problem.world;
    let (c_max, t_prop, resolution) = (params.c_max, params.t_prop, params.resolution);

    let root = AugmentedState::new(problem.x_init.clone(), 0.0).to_vec();
    let sample = |b: &mut StreamBundle, out: &mut Vec<f64>| {
        sample_box_into(&mut b.state, &system.state_bounds, out);
        let u: f64 = b.cost.random_range(0.0..1.0);
        out.push(u * c_max);
    };
    let extend = |from: &[f64], b: &mut StreamBundle| {
        let tu: f64 = b.duration.random_range(0.0..1.0);
        let t = tu * t_prop;
        sample_box_into(&mut b.control, &system.control_bounds, &mut ur);
        let y = AugmentedState::from_vec(from);
        match integ.propagate_augmented_into(system, &y, &ur, t, &mut traj) {
            Ok(y_new) => {
                if !collision_free(world, &traj, resolution) {
                    return None;
                }
                let edge =
                    EdgeInfo { segment: traj.segments[0].clone(), cost: traj.cost };
                Some((y_new.to_vec(), edge))
            }
            Err(_) => None,
        }
    };
    Ok(grow_generic_rrt(root, map, iterations, &mut bundle, sample, extend))
}

/// Bit-level comparison of a planner tree against a generic-harness tree:
/// node count, every coordinate of every point, parents, and edge controls,
/// durations, and costs must match exactly. Returns a description of the
/// first mismatch.
pub fn compare_trees(a: &PlanTree, b: &GenericTree) -> std::result::Result<(), String> {
    if a.len() != b.len() {
        return Err(format!("node counts differ: {} vs {}", a.len(), b.len()));
    }
    for id in 0..a.len() {
        let node = a.node(id as u32);
        let point = &b.points[id];
        let flat = node.y.to_vec();
        if flat.len() != point.len() {
            return Err(format!("node {id}: dimension {} vs {}", flat.len(), point.len()));
        }
        for (k, (x, y)) in flat.iter().zip(point).enumerate() {
            if x.to_bits() != y.to_bits() {
                return Err(format!("node {id}: coordinate {k} differs: {x} vs {y}"));
            }
        }
        if node.parent != b.parents[id] {
            return Err(format!(
                "node {id}: parent {:?} vs {:?}",
                node.parent, b.parents[id]
            ));
        }
        match (&node.edge, &b.edges[id]) {
            (None, None) => {}
            (Some(ea), Some(eb)) => {
                if ea.cost.to_bits() != eb.cost.to_bits() {
                    return Err(format!("node {id}: edge cost {} vs {}", ea.cost, eb.cost));
                }
                if ea.segment.duration.to_bits() != eb.segment.duration.to_bits() {
                    return Err(format!(
                        "node {id}: edge duration {} vs {}",
                        ea.segment.duration, eb.segment.duration
                    ));
                }
                let (ca, cb) = (&ea.segment.control.0, &eb.segment.control.0);
                if ca.len() != cb.len()
                    || ca.iter().zip(cb).any(|(x, y)| x.to_bits() != y.to_bits())
                {
                    return Err(format!("node {id}: edge controls differ"));
                }
            }
            _ => return Err(format!("node {id}: edge presence differs")),
        }
    }
    Ok(())
}
