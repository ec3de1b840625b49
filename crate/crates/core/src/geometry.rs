//! Workspace geometry: obstacles, the free-space predicate, and
//! trajectory collision checking.
//!
//! Freedom is strict: a state is free only if it lies strictly inside the
//! planning bounds and strictly outside every obstacle — obstacle and
//! boundary surfaces themselves are not free. Obstacles may apply to a
//! projection of the state (e.g. the position coordinates of a car whose
//! heading is unconstrained).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Bounds, GoalRegion, Trajectory};

/// A forbidden region over a projection of the state space.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Obstacle {
    Box {
        min: Vec<f64>,
        max: Vec<f64>,
        /// State axes the box applies to; defaults to the first `min.len()`
        /// axes when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        projection: Option<Vec<usize>>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        projection: Option<Vec<usize>>,
    },
}

impl Obstacle {
    fn axes(&self) -> (usize, Option<&[usize]>) {
        match self {
            Obstacle::Box { min, projection, .. } => (min.len(), projection.as_deref()),
            Obstacle::Ball { center, projection, .. } => (center.len(), projection.as_deref()),
        }
    }

    pub fn validate(&self, state_dim: usize) -> Result<()> {
        let (len, projection) = self.axes();
        match projection {
            Some(axes) => {
                if axes.len() != len {
                    return Err(Error::InvalidScenario {
                        field: "obstacle.projection".into(),
                        reason: format!(
                            "projection has {} axes but the obstacle is {len}-dimensional",
                            axes.len()
                        ),
                    });
                }
                for &a in axes {
                    if a >= state_dim {
                        return Err(Error::InvalidScenario {
                            field: "obstacle.projection".into(),
                            reason: format!("axis {a} out of range for state dim {state_dim}"),
                        });
                    }
                }
            }
            None => {
                if len > state_dim {
                    return Err(Error::InvalidScenario {
                        field: "obstacle".into(),
                        reason: format!(
                            "{len}-dimensional obstacle in a {state_dim}-dimensional state space"
                        ),
                    });
                }
            }
        }
        match self {
            Obstacle::Box { min, max, .. } => {
                if min.len() != max.len() {
                    return Err(Error::InvalidScenario {
                        field: "obstacle.box".into(),
                        reason: "min and max lengths differ".into(),
                    });
                }
                for (lo, hi) in min.iter().zip(max) {
                    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                        return Err(Error::InvalidScenario {
                            field: "obstacle.box".into(),
                            reason: format!("invalid extent [{lo}, {hi}]"),
                        });
                    }
                }
            }
            Obstacle::Ball { center, radius, .. } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::InvalidScenario {
                        field: "obstacle.ball".into(),
                        reason: format!("radius must be > 0, got {radius}"),
                    });
                }
                if center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidScenario {
                        field: "obstacle.ball".into(),
                        reason: "non-finite center".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Coordinate of `x` along the obstacle's `i`-th own axis.
    #[inline]
    fn coord(&self, x: &[f64], i: usize) -> f64 {
        let (_, projection) = self.axes();
        match projection {
            Some(axes) => x[axes[i]],
            None => x[i],
        }
    }

    /// Closed containment: surface points count as inside the obstacle.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Obstacle::Box { min, max, .. } => (0..min.len())
                .all(|i| {
                    let v = self.coord(x, i);
                    v >= min[i] && v <= max[i]
                }),
            Obstacle::Ball { center, radius, .. } => {
                let mut d2 = 0.0;
                for i in 0..center.len() {
                    let d = self.coord(x, i) - center[i];
                    d2 += d * d;
                }
                d2 <= radius * radius
            }
        }
    }

    /// Euclidean distance from `x` (projected onto the obstacle's axes) to
    /// the obstacle region; zero inside.
    pub fn gap(&self, x: &[f64]) -> f64 {
        match self {
            Obstacle::Box { min, max, .. } => {
                let mut d2 = 0.0;
                for i in 0..min.len() {
                    let v = self.coord(x, i);
                    let excess = (min[i] - v).max(v - max[i]).max(0.0);
                    d2 += excess * excess;
                }
                d2.sqrt()
            }
            Obstacle::Ball { center, radius, .. } => {
                let mut d2 = 0.0;
                for i in 0..center.len() {
                    let d = self.coord(x, i) - center[i];
                    d2 += d * d;
                }
                (d2.sqrt() - radius).max(0.0)
            }
        }
    }
}

/// The static environment a planner operates in: hard bounds plus obstacles.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ObstacleSet {
    pub bounds: Bounds,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
}

impl ObstacleSet {
    pub fn new(bounds: Bounds, obstacles: Vec<Obstacle>) -> Result<Self> {
        bounds.validate()?;
        for obs in &obstacles {
            obs.validate(bounds.dim())?;
        }
        Ok(Self { bounds, obstacles })
    }

    /// Strict freedom: strictly inside bounds and strictly outside every
    /// obstacle.
    pub fn is_free(&self, x: &[f64]) -> bool {
        self.bounds.contains_open(x) && !self.obstacles.iter().any(|o| o.contains(x))
    }

    /// Distance from a free state to the nearest forbidden surface
    /// (obstacles or the bounds boundary); zero if not free.
    pub fn gap(&self, x: &[f64]) -> f64 {
        let mut g = self.bounds.boundary_gap(x);
        for o in &self.obstacles {
            g = g.min(o.gap(x));
        }
        g.max(0.0)
    }
}

/// Whether every point of the trajectory, densified so consecutive checks
/// are at most `resolution` apart in time (by linear interpolation between
/// stored samples), is free.
pub fn collision_free(set: &ObstacleSet, traj: &Trajectory, resolution: f64) -> bool {
    assert!(resolution > 0.0, "collision resolution must be > 0");
    if traj.len() == 0 {
        return true;
    }
    let d = traj.dim;
    let (_, first) = traj.sample(0);
    if !set.is_free(first) {
        return false;
    }
    let mut point = vec![0.0; d];
    for i in 0..traj.len().saturating_sub(1) {
        let (t0, x0) = traj.sample(i);
        let (t1, x1) = traj.sample(i + 1);
        let span = t1 - t0;
        let pieces = if span <= resolution { 1 } else { (span / resolution).ceil() as usize };
        for j in 1..=pieces {
            let a = j as f64 / pieces as f64;
            for k in 0..d {
                point[k] = x0[k] + a * (x1[k] - x0[k]);
            }
            if !set.is_free(&point) {
                return false;
            }
        }
    }
    true
}

/// Sampled safety margin of a candidate solution: the smallest gap to any
/// forbidden surface along the densified trajectory, further reduced by how
/// deep the final state sits inside the goal region. Clamped at zero; a
/// strictly positive value certifies (up to sampling density) that small
/// perturbations preserve both feasibility and goal attainment.
pub fn clearance(
    set: &ObstacleSet,
    traj: &Trajectory,
    goal: &GoalRegion,
    resolution: f64,
) -> f64 {
    assert!(resolution > 0.0, "clearance resolution must be > 0");
    if traj.len() == 0 {
        return 0.0;
    }
    let d = traj.dim;
    let (_, first) = traj.sample(0);
    let mut margin = set.gap(first);
    let mut point = vec![0.0; d];
    for i in 0..traj.len().saturating_sub(1) {
        let (t0, x0) = traj.sample(i);
        let (t1, x1) = traj.sample(i + 1);
        let span = t1 - t0;
        let pieces = if span <= resolution { 1 } else { (span / resolution).ceil() as usize };
        for j in 1..=pieces {
            let a = j as f64 / pieces as f64;
            for k in 0..d {
                point[k] = x0[k] + a * (x1[k] - x0[k]);
            }
            margin = margin.min(set.gap(&point));
        }
    }
    let goal_margin = goal.radius - goal.project_to_goal_distance(traj.last_state());
    margin.min(goal_margin).max(0.0)
}
