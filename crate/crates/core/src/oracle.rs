//! Analytic optimal-cost references for scenarios that admit them.
//!
//! Two oracles are provided, each an *exact* optimum under conditions it
//! verifies before answering (returning [`Error::Unsupported`] otherwise):
//!
//! - [`shortest_path_to_ball`]: length of the shortest path in the plane
//!   from a start point to a closed goal disk, around closed axis-aligned
//!   box obstacles. Computed on the visibility graph of the start and all
//!   box corners; paths may graze box boundaries (the planner's strictly
//!   open free space makes this value an infimum — approachable, never
//!   attained). State bounds are ignored, which can only make the true
//!   constrained optimum larger, so the value is always a valid lower
//!   bound and is exact when bounds don't bind.
//! - [`min_time_double_integrator`]: minimum time for a 1-D double
//!   integrator starting at rest at the origin to reach a closed ball in
//!   `(position, velocity)` phase space under `|acceleration| <= a_max`,
//!   found by a tangency fixpoint on the closed-form point-to-point
//!   minimum-time function. Velocity/position bounds are ignored with the
//!   same one-sided consequence.
//!
//! [`optimal_cost`] dispatches on a scenario's [`OracleKind`] declaration.

use crate::error::{Error, Result};
use crate::geometry::Obstacle;
use crate::scenario::{OracleKind, Scenario, SystemSpec};

/// Exact shortest-path length from `start` to the closed disk of `radius`
/// about `center`, avoiding the open interiors of the given boxes.
///
/// Requirements checked: the start must lie outside every closed box, and
/// no box may intersect the closed goal disk (this keeps the optimal final
/// approach radial, which the construction relies on for exactness).
pub fn shortest_path_to_ball(
    start: [f64; 2],
    boxes: &[([f64; 2], [f64; 2])],
    center: [f64; 2],
    radius: f64,
) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Parameter(format!("radius must be > 0, got {radius}")));
    }
    for (lo, hi) in boxes {
        if !(lo[0] < hi[0] && lo[1] < hi[1]) {
            return Err(Error::Parameter("box with empty interior".into()));
        }
        if inside_closed(start, *lo, *hi) {
            return Err(Error::Unsupported("start lies inside an obstacle".into()));
        }
        if box_gap(center, *lo, *hi) <= radius {
            return Err(Error::Unsupported(
                "an obstacle touches the goal disk; the radial-entry construction \
                 would not be exact"
                    .into(),
            ));
        }
    }
    let to_center = dist2d(start, center);
    if to_center <= radius {
        return Ok(0.0);
    }

    // Vertices: start, then every box corner. Corners buried inside other
    // boxes get no visibility edges and drop out naturally.
    let mut vertices: Vec<[f64; 2]> = Vec::with_capacity(1 + 4 * boxes.len());
    vertices.push(start);
    for (lo, hi) in boxes {
        vertices.push([lo[0], lo[1]]);
        vertices.push([hi[0], lo[1]]);
        vertices.push([hi[0], hi[1]]);
        vertices.push([lo[0], hi[1]]);
    }

    // Dijkstra over the visibility graph (scan-min: the graph is tiny and
    // this keeps the arithmetic order fixed).
    let n = vertices.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[0] = 0.0;
    loop {
        let mut u = usize::MAX;
        let mut best = f64::INFINITY;
        for i in 0..n {
            if !done[i] && dist[i] < best {
                best = dist[i];
                u = i;
            }
        }
        if u == usize::MAX {
            break;
        }
        done[u] = true;
        for v in 0..n {
            if !done[v] && visible(vertices[u], vertices[v], boxes) {
                let cand = dist[u] + dist2d(vertices[u], vertices[v]);
                if cand < dist[v] {
                    dist[v] = cand;
                }
            }
        }
    }

    // Final leg: from each reachable vertex, enter the disk radially. The
    // entry point lies on the segment toward the center, so checking that
    // segment covers it.
    let mut best = f64::INFINITY;
    for (i, &v) in vertices.iter().enumerate() {
        if !dist[i].is_finite() {
            continue;
        }
        let d = dist2d(v, center);
        let leg = (d - radius).max(0.0);
        if dist[i] + leg < best && visible(v, center, boxes) {
            best = dist[i] + leg;
        }
    }
    if !best.is_finite() {
        return Err(Error::Unsupported("goal disk is unreachable".into()));
    }
    Ok(best)
}

fn dist2d(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn inside_closed(p: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> bool {
    p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1]
}

fn inside_open(p: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> bool {
    p[0] > lo[0] && p[0] < hi[0] && p[1] > lo[1] && p[1] < hi[1]
}

/// Distance from a point to a closed box (0 inside).
fn box_gap(p: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let dx = (lo[0] - p[0]).max(0.0).max(p[0] - hi[0]);
    let dy = (lo[1] - p[1]).max(0.0).max(p[1] - hi[1]);
    (dx * dx + dy * dy).sqrt()
}

/// Whether the open segment `a-b` avoids every box's open interior.
/// Grazing contact — touching a corner or sliding along a face — counts as
/// visible, matching the infimum semantics of the oracle.
fn visible(a: [f64; 2], b: [f64; 2], boxes: &[([f64; 2], [f64; 2])]) -> bool {
    for (lo, hi) in boxes {
        // Clip the segment against the closed box (Liang–Barsky): track the
        // parameter interval [t0, t1] of the intersection.
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        let mut miss = false;
        for axis in 0..2 {
            let d = b[axis] - a[axis];
            if d == 0.0 {
                if a[axis] < lo[axis] || a[axis] > hi[axis] {
                    miss = true;
                    break;
                }
            } else {
                let ta = (lo[axis] - a[axis]) / d;
                let tb = (hi[axis] - a[axis]) / d;
                let (enter, exit) = if ta <= tb { (ta, tb) } else { (tb, ta) };
                t0 = t0.max(enter);
                t1 = t1.min(exit);
                if t0 > t1 {
                    miss = true;
                    break;
                }
            }
        }
        if miss || t1 <= t0 {
            continue; // no overlap, or a single grazing point
        }
        // Positive-length overlap with the closed box. It blocks sight only
        // if it actually enters the interior; probing the midpoint decides
        // (sliding along a face keeps the whole interval on the boundary).
        let tm = 0.5 * (t0 + t1);
        let m = [a[0] + tm * (b[0] - a[0]), a[1] + tm * (b[1] - a[1])];
        if inside_open(m, *lo, *hi) {
            return false;
        }
    }
    true
}

/// Minimum time for `p' = v, v' = u, |u| <= a_max` from `(0,0)` to the
/// point `(p, v)` (closed form, bang-bang with one switch).
pub fn double_integrator_time(p: f64, v: f64, a_max: f64) -> f64 {
    debug_assert!(a_max > 0.0);
    // Rescale to unit acceleration: T_a(p, v) = T_1(a*p, v) / a (position
    // scales with acceleration at fixed arrival speed; velocity does not).
    let p = p * a_max;
    if p >= v * v.abs() / 2.0 {
        // Accelerate, then decelerate (peak speed s >= max(0, v)).
        let s = (p + v * v / 2.0).sqrt();
        (2.0 * s - v) / a_max
    } else {
        // Mirror case: decelerate (possibly reversing), then accelerate.
        let s = (v * v / 2.0 - p).sqrt();
        (2.0 * s + v) / a_max
    }
}

fn double_integrator_time_grad(p: f64, v: f64, a_max: f64) -> (f64, f64) {
    // d/dp and d/dv of double_integrator_time, chained through the rescale.
    let ps = p * a_max;
    if ps >= v * v.abs() / 2.0 {
        let s = (ps + v * v / 2.0).sqrt();
        (1.0 / s, (v / s - 1.0) / a_max)
    } else {
        let s = (v * v / 2.0 - ps).sqrt();
        (-1.0 / s, (v / s + 1.0) / a_max)
    }
}

/// Minimum over the closed phase-space ball of the minimum arrival time,
/// i.e. the cheapest cost any planner trajectory ending inside the ball can
/// have (ignoring state bounds, which only raise the true value).
///
/// The minimizer lies where the time function's gradient is radial; the
/// fixpoint iteration `e <- center - r * grad/|grad|` contracts onto it for
/// balls that stay clear of the zero-gradient set (checked).
pub fn min_time_double_integrator(
    center: (f64, f64),
    radius: f64,
    a_max: f64,
) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Parameter(format!("radius must be > 0, got {radius}")));
    }
    if !(a_max > 0.0) || !a_max.is_finite() {
        return Err(Error::Parameter(format!("a_max must be > 0, got {a_max}")));
    }
    // Ball contains the start: zero cost.
    if (center.0 * center.0 + center.1 * center.1).sqrt() <= radius {
        return Ok(0.0);
    }
    // The gradient degenerates where the switch parabola (s = 0) meets the
    // ball; keep clear of it so the tangency map contracts.
    let (mut ep, mut ev) = center;
    for _ in 0..64 {
        let (gp, gv) = double_integrator_time_grad(ep, ev, a_max);
        let norm = (gp * gp + gv * gv).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Unsupported(
                "goal ball touches the degenerate switching locus".into(),
            ));
        }
        ep = center.0 - radius * gp / norm;
        ev = center.1 - radius * gv / norm;
    }
    let t = double_integrator_time(ep, ev, a_max);
    if !t.is_finite() {
        return Err(Error::Unsupported("tangency iteration diverged".into()));
    }
    Ok(t)
}

/// The scenario's declared analytic optimum, if it declares one.
///
/// Returns `Ok(None)` for [`OracleKind::None`], the exact optimal cost for
/// supported combinations, and [`Error::Unsupported`] when the declaration
/// does not match the scenario's system or geometry.
pub fn optimal_cost(scenario: &Scenario) -> Result<Option<f64>> {
    match scenario.oracle {
        OracleKind::None => Ok(None),
        OracleKind::ShortestPath => {
            let u_max = match scenario.system {
                SystemSpec::SingleIntegrator2d { u_max } => u_max,
                _ => {
                    return Err(Error::Unsupported(
                        "shortest-path reference needs the velocity-controlled \
                         planar point"
                            .into(),
                    ))
                }
            };
            if scenario.x_init.len() != 2 || scenario.goal.projection != [0, 1] {
                return Err(Error::Unsupported(
                    "shortest-path reference needs a 2-D state and a goal over \
                     both coordinates"
                        .into(),
                ));
            }
            let mut boxes = Vec::with_capacity(scenario.obstacles.len());
            for obstacle in &scenario.obstacles {
                match obstacle {
                    Obstacle::Box { min, max, projection }
                        if projection.is_none()
                            || projection.as_deref() == Some(&[0, 1][..]) =>
                    {
                        boxes.push(([min[0], min[1]], [max[0], max[1]]));
                    }
                    _ => {
                        return Err(Error::Unsupported(
                            "shortest-path reference handles planar box obstacles \
                             only"
                                .into(),
                        ))
                    }
                }
            }
            let length = shortest_path_to_ball(
                [scenario.x_init[0], scenario.x_init[1]],
                &boxes,
                [scenario.goal.center[0], scenario.goal.center[1]],
                scenario.goal.radius,
            )?;
            Ok(Some(length / u_max))
        }
        OracleKind::MinTime => {
            if !matches!(scenario.system, SystemSpec::DoubleIntegrator1d) {
                return Err(Error::Unsupported(
                    "minimum-time reference needs the 1-D double integrator".into(),
                ));
            }
            if !scenario.obstacles.is_empty() {
                return Err(Error::Unsupported(
                    "minimum-time reference handles obstacle-free phase space only"
                        .into(),
                ));
            }
            if scenario.x_init != [0.0, 0.0] || scenario.goal.projection != [0, 1] {
                return Err(Error::Unsupported(
                    "minimum-time reference needs a rest start at the origin and \
                     a goal over (position, velocity)"
                        .into(),
                ));
            }
            let (lo, hi) = (scenario.control_bounds.min[0], scenario.control_bounds.max[0]);
            if lo != -hi || !(hi > 0.0) {
                return Err(Error::Unsupported(
                    "minimum-time reference needs symmetric acceleration bounds"
                        .into(),
                ));
            }
            let t = min_time_double_integrator(
                (scenario.goal.center[0], scenario.goal.center[1]),
                scenario.goal.radius,
                hi,
            )?;
            Ok(Some(t))
        }
    }
}
