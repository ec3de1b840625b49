//! Core value types: states, controls, augmented states, trajectories,
//! axis-aligned bounds, and goal regions.
//!
//! The planners search an augmented space `Y = X x R+` whose points pair a
//! system state with the cost accumulated to reach it, so the cost coordinate
//! is a first-class part of [`AugmentedState`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the system state space `X`, stored as a flat coordinate vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State(pub Vec<f64>);

impl State {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// A control input `u`, constant over the duration of one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Control(pub Vec<f64>);

impl Control {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// A state paired with the cost accumulated to reach it: a point of the
/// augmented space `Y = X x R+`.
///
/// The cost coordinate is always finite and non-negative; constructors
/// assert this because a negative accumulated cost can only arise from a
/// bookkeeping bug.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub x: State,
    pub c: f64,
}

impl AugmentedState {
    pub fn new(x: State, c: f64) -> Self {
        assert!(
            c.is_finite() && c >= 0.0,
            "augmented state cost must be finite and non-negative, got {c}"
        );
        Self { x, c }
    }

    /// The augmented point as a flat `(x, c)` vector of length `dim(x) + 1`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.x.dim() + 1);
        v.extend_from_slice(self.x.as_slice());
        v.push(self.c);
        v
    }

    /// Inverse of [`to_vec`](Self::to_vec): split a flat vector into `(x, c)`.
    pub fn from_vec(v: &[f64]) -> Self {
        let (xs, c) = v.split_at(v.len() - 1);
        Self::new(State(xs.to_vec()), c[0])
    }
}

/// A piecewise-constant control applied for a fixed duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSegment {
    pub control: Control,
    pub duration: f64,
}

impl ControlSegment {
    pub fn new(control: Control, duration: f64) -> Result<Self> {
        if !duration.is_finite() || duration < 0.0 {
            return Err(Error::Parameter(format!(
                "segment duration must be finite and >= 0, got {duration}"
            )));
        }
        Ok(Self { control, duration })
    }
}

/// A time-stamped state path with the control schedule that produced it and
/// the cost accumulated along it.
///
/// Sample states are stored flat (`states[i*dim .. (i+1)*dim]` is sample `i`)
/// so that propagation in the planners' inner loop does not allocate per
/// sample. Times start at 0 and are strictly increasing; sample boundaries
/// always align with segment boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dim: usize,
    /// Sample timestamps, starting at 0.0.
    pub times: Vec<f64>,
    /// Flattened sample states, `times.len() * dim` entries.
    pub states: Vec<f64>,
    /// Piecewise-constant control schedule covering the whole time range.
    pub segments: Vec<ControlSegment>,
    /// Cost accumulated over the trajectory (integral of the running cost).
    pub cost: f64,
}

impl Trajectory {
    /// An empty trajectory shell for use as a reusable propagation buffer.
    pub fn empty(dim: usize) -> Self {
        Self { dim, times: Vec::new(), states: Vec::new(), segments: Vec::new(), cost: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample `i` as `(time, state-slice)`.
    pub fn sample(&self, i: usize) -> (f64, &[f64]) {
        (self.times[i], &self.states[i * self.dim..(i + 1) * self.dim])
    }

    pub fn first_state(&self) -> &[f64] {
        &self.states[..self.dim]
    }

    pub fn last_state(&self) -> &[f64] {
        &self.states[self.states.len() - self.dim..]
    }

    pub fn duration(&self) -> f64 {
        if self.times.is_empty() { 0.0 } else { self.times[self.times.len() - 1] }
    }

    fn push_sample(&mut self, t: f64, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        self.times.push(t);
        self.states.extend_from_slice(x);
    }

    /// Reset to a single-sample trajectory starting at `x` (time 0, cost 0).
    pub fn reset(&mut self, x: &[f64]) {
        self.dim = x.len();
        self.times.clear();
        self.states.clear();
        self.segments.clear();
        self.cost = 0.0;
        self.push_sample(0.0, x);
    }

    /// Append a sample at absolute time `t`; `t` must exceed the last time.
    pub(crate) fn append_sample(&mut self, t: f64, x: &[f64]) {
        debug_assert!(self.times.last().map_or(true, |&last| t > last));
        self.push_sample(t, x);
    }

    /// Structural validation: monotone times starting at 0, consistent
    /// lengths, and segment durations summing to the final timestamp.
    pub fn validate(&self) -> Result<()> {
        if self.times.is_empty() {
            return Err(Error::Parameter("trajectory has no samples".into()));
        }
        if self.states.len() != self.times.len() * self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.times.len() * self.dim,
                got: self.states.len(),
            });
        }
        if self.times[0] != 0.0 {
            return Err(Error::Parameter(format!(
                "trajectory must start at time 0, starts at {}",
                self.times[0]
            )));
        }
        for w in self.times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Parameter(format!(
                    "trajectory times must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        let seg_total: f64 = self.segments.iter().map(|s| s.duration).sum();
        let horizon = self.duration();
        if (seg_total - horizon).abs() > 1e-9 * horizon.max(1.0) {
            return Err(Error::Parameter(format!(
                "segment durations sum to {seg_total} but trajectory spans {horizon}"
            )));
        }
        Ok(())
    }

    /// Append another trajectory that starts where this one ends. Times are
    /// shifted, the duplicated junction sample is dropped, and costs add.
    pub fn concat(&mut self, next: &Trajectory) -> Result<()> {
        if next.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: next.dim });
        }
        if next.is_empty() {
            return Ok(());
        }
        let offset = self.duration();
        // Skip the junction sample: `next` starts at our final state.
        for i in 1..next.len() {
            let (t, x) = next.sample(i);
            self.push_sample(offset + t, x);
        }
        self.segments.extend(next.segments.iter().cloned());
        self.cost += next.cost;
        Ok(())
    }

    /// `true` if this trajectory is a single point (zero duration).
    pub fn is_point(&self) -> bool {
        self.times.len() == 1
    }
}

/// An axis-aligned box, used for state bounds and control bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Bounds {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        let b = Self { min, max };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min.len() != self.max.len() {
            return Err(Error::DimensionMismatch { expected: self.min.len(), got: self.max.len() });
        }
        for (i, (lo, hi)) in self.min.iter().zip(&self.max).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
                return Err(Error::Parameter(format!(
                    "bounds axis {i} must satisfy min < max with finite values ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Strict interior membership: points on the boundary are outside.
    pub fn contains_open(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.min.iter().zip(&self.max))
                .all(|(v, (lo, hi))| lo < v && v < hi)
    }

    /// Distance from an interior point to the nearest face (negative outside
    /// is clamped to 0 by callers; here it may go negative).
    pub fn boundary_gap(&self, x: &[f64]) -> f64 {
        let mut gap = f64::INFINITY;
        for (v, (lo, hi)) in x.iter().zip(self.min.iter().zip(&self.max)) {
            gap = gap.min(v - lo).min(hi - v);
        }
        gap
    }
}

/// A goal set: a closed Euclidean ball over a subset of state coordinates.
///
/// `projection` lists the state coordinate indices the ball constrains; all
/// other coordinates are unconstrained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalRegion {
    pub center: Vec<f64>,
    pub radius: f64,
    pub projection: Vec<usize>,
}

impl GoalRegion {
    pub fn new(center: Vec<f64>, radius: f64, projection: Vec<usize>) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Parameter(format!("goal radius must be > 0, got {radius}")));
        }
        if center.len() != projection.len() {
            return Err(Error::DimensionMismatch {
                expected: projection.len(),
                got: center.len(),
            });
        }
        Ok(Self { center, radius, projection })
    }

    /// Euclidean distance from the projected state coordinates to the goal
    /// center.
    pub fn project_to_goal_distance(&self, x: &[f64]) -> f64 {
        let mut d2 = 0.0;
        for (ci, &axis) in self.center.iter().zip(&self.projection) {
            let d = x[axis] - ci;
            d2 += d * d;
        }
        d2.sqrt()
    }

    /// Membership in the closed goal ball.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.project_to_goal_distance(x) <= self.radius
    }
}
