//! Benchmark scenarios: a system, a world, a start, a goal, tuned planner
//! defaults, and optionally an analytic optimal-cost reference.
//!
//! Scenarios serialize to a versioned JSON document so benchmark problems
//! can be stored, shared, and edited; four builtins cover the common cases:
//!
//! - `geo2d_one_box` — geometric shortest path around a box for a
//!   velocity-controlled point. The goal ball is placed so the taut path
//!   around the upper corners has length exactly `2*sqrt(17) + 2`, giving
//!   an exact optimum to measure convergence against.
//! - `di1d_rest_to_rest` — 1-D double integrator from the origin to a ball
//!   in phase space, positioned tangent to a level set of the analytic
//!   minimum-time function so the optimum is exactly 4 time units.
//! - `di2d_two_boxes` — planar double integrator slaloming through two
//!   offset walls; no analytic reference.
//! - `car_parking_lite` — kinematic car rounding a wall into a parking
//!   ball; no analytic reference.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    DoubleIntegrator1d, DoubleIntegrator2d, KinematicCar, LipschitzDecl, SingleIntegrator2d,
    SystemDefinition,
};
use crate::error::{Error, Result};
use crate::geometry::{Obstacle, ObstacleSet};
use crate::metric::MetricWeights;
use crate::planners::{PlannerParams, Problem};
use crate::types::{Bounds, GoalRegion, State};

/// Current scenario document version.
pub const SCHEMA_VERSION: u32 = 1;

/// Which dynamical system a scenario runs on, with its physical parameters.
/// Bounds live on the scenario, not here, so the same system can be reused
/// over different domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum SystemSpec {
    /// Velocity-controlled planar point; speed saturated to `u_max`.
    SingleIntegrator2d { u_max: f64 },
    /// 1-D double integrator: state `(p, v)`, control `(a)`.
    DoubleIntegrator1d,
    /// Planar double integrator: state `(px, py, vx, vy)`, control `(ax, ay)`.
    DoubleIntegrator2d,
    /// Kinematic car: state `(x, y, heading)`, control `(speed, steering)`.
    KinematicCar { wheelbase: f64 },
}

impl SystemSpec {
    /// Instantiate the dynamics with the scenario's bounds, deriving
    /// Lipschitz constants valid over those bounds.
    pub fn build(&self, state_bounds: Bounds, control_bounds: Bounds) -> Result<SystemDefinition> {
        let (name, dynamics, lipschitz): (&str, Arc<_>, _) = match *self {
            SystemSpec::SingleIntegrator2d { u_max } => {
                if !(u_max > 0.0) || !u_max.is_finite() {
                    return Err(Error::InvalidScenario {
                        field: "system.u_max".into(),
                        reason: format!("must be finite and > 0, got {u_max}"),
                    });
                }
                (
                    "single-integrator-2d",
                    Arc::new(SingleIntegrator2d { u_max }) as Arc<_>,
                    // Saturation is 1-Lipschitz in u and ignores x; cost
                    // rate is constant.
                    LipschitzDecl { k_x_f: 0.0, k_u_f: 1.0, k_x_g: 0.0, k_u_g: 0.0 },
                )
            }
            SystemSpec::DoubleIntegrator1d => (
                "double-integrator-1d",
                Arc::new(DoubleIntegrator1d) as Arc<_>,
                // d(p,v)/dt = (v, a): unit gain from v to p and from a to v.
                LipschitzDecl { k_x_f: 1.0, k_u_f: 1.0, k_x_g: 0.0, k_u_g: 0.0 },
            ),
            SystemSpec::DoubleIntegrator2d => (
                "double-integrator-2d",
                Arc::new(DoubleIntegrator2d) as Arc<_>,
                LipschitzDecl { k_x_f: 1.0, k_u_f: 1.0, k_x_g: 0.0, k_u_g: 0.0 },
            ),
            SystemSpec::KinematicCar { wheelbase } => {
                if !(wheelbase > 0.0) || !wheelbase.is_finite() {
                    return Err(Error::InvalidScenario {
                        field: "system.wheelbase".into(),
                        reason: format!("must be finite and > 0, got {wheelbase}"),
                    });
                }
                if control_bounds.dim() != 2 {
                    return Err(Error::DimensionMismatch {
                        expected: 2,
                        got: control_bounds.dim(),
                    });
                }
                let abs_max = |axis: usize| -> f64 {
                    control_bounds.min[axis].abs().max(control_bounds.max[axis].abs())
                };
                let (v_max, phi_max) = (abs_max(0), abs_max(1));
                if phi_max >= std::f64::consts::FRAC_PI_2 {
                    return Err(Error::InvalidScenario {
                        field: "control_bounds".into(),
                        reason: format!(
                            "steering range reaches {phi_max} rad; tan() must stay bounded"
                        ),
                    });
                }
                // State sensitivity: only the heading column is nonzero,
                // with norm |v| <= v_max. Control sensitivity: Frobenius
                // bound over the speed column (cos, sin, tan(phi)/L) and the
                // steering column (0, 0, v*sec^2(phi)/L).
                let tan_m = phi_max.tan();
                let sec2_m = 1.0 + tan_m * tan_m;
                let k_u_f = (1.0
                    + (tan_m / wheelbase).powi(2)
                    + (v_max * sec2_m / wheelbase).powi(2))
                .sqrt();
                (
                    "kinematic-car",
                    Arc::new(KinematicCar { wheelbase }) as Arc<_>,
                    LipschitzDecl { k_x_f: v_max, k_u_f, k_x_g: 0.0, k_u_g: 0.0 },
                )
            }
        };
        SystemDefinition::new(name, dynamics, state_bounds, control_bounds, Some(lipschitz))
    }
}

/// Analytic optimal-cost reference attached to a scenario, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    /// No reference available.
    #[default]
    None,
    /// Shortest collision-free path length around box obstacles, divided by
    /// the top speed (velocity-controlled systems only).
    ShortestPath,
    /// Minimum time for the 1-D double integrator from rest at the origin
    /// to the goal ball in phase space.
    MinTime,
}

/// A complete benchmark problem description, serializable as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Document version; must equal [`SCHEMA_VERSION`].
    pub schema: u32,
    pub name: String,
    pub system: SystemSpec,
    pub state_bounds: Bounds,
    pub control_bounds: Bounds,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    pub x_init: Vec<f64>,
    pub goal: GoalRegion,
    /// Planner parameters tuned for this scenario (callers may override).
    #[serde(default)]
    pub defaults: PlannerParams,
    #[serde(default)]
    pub oracle: OracleKind,
}

impl Scenario {
    /// Names of the builtin scenarios, in canonical order.
    pub fn builtin_names() -> &'static [&'static str] {
        &["geo2d_one_box", "di1d_rest_to_rest", "di2d_two_boxes", "car_parking_lite"]
    }

    /// Look up a builtin scenario by name.
    pub fn builtin(name: &str) -> Result<Scenario> {
        let scenario = match name {
            "geo2d_one_box" => geo2d_one_box(),
            "di1d_rest_to_rest" => di1d_rest_to_rest(),
            "di2d_two_boxes" => di2d_two_boxes(),
            "car_parking_lite" => car_parking_lite(),
            _ => {
                return Err(Error::InvalidScenario {
                    field: "name".into(),
                    reason: format!(
                        "unknown builtin `{name}`; available: {}",
                        Self::builtin_names().join(", ")
                    ),
                })
            }
        };
        debug_assert!(scenario.validate().is_ok());
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::InvalidScenario {
                field: "schema".into(),
                reason: format!("version {} unsupported (expected {SCHEMA_VERSION})", self.schema),
            });
        }
        if self.name.is_empty() {
            return Err(Error::InvalidScenario {
                field: "name".into(),
                reason: "must be non-empty".into(),
            });
        }
        self.defaults.validate()?;
        self.problem()?.validate()
    }

    /// Build the planning problem this scenario describes.
    pub fn problem(&self) -> Result<Problem> {
        let system = self.system.build(self.state_bounds.clone(), self.control_bounds.clone())?;
        let world = ObstacleSet::new(self.state_bounds.clone(), self.obstacles.clone())?;
        Ok(Problem {
            system,
            world,
            x_init: State(self.x_init.clone()),
            goal: self.goal.clone(),
        })
    }

    /// The scenario's tuned planner parameters.
    pub fn params(&self) -> PlannerParams {
        self.defaults.clone()
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        let scenario: Scenario =
            serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Shortest path around one box, velocity-controlled point, top speed 1.
///
/// The box spans `[4,6] x [-1,1]`; the start sits at the origin; the goal
/// ball (radius 1/4) is placed on the x-axis so that the taut path around
/// an upper (or lower) corner pair — `(0,0) -> (4,1) -> (6,1) -> ball` —
/// has legs `sqrt(17) + 2 + sqrt(17)`: the optimum is exactly
/// `2*sqrt(17) + 2 ≈ 10.2462`. Placing the ball center at distance
/// `sqrt(17) + 1/4` from the corner `(6,1)` does it.
fn geo2d_one_box() -> Scenario {
    let goal_x = 6.0 + (16.0625 + 0.5 * 17.0_f64.sqrt()).sqrt();
    Scenario {
        schema: SCHEMA_VERSION,
        name: "geo2d_one_box".into(),
        system: SystemSpec::SingleIntegrator2d { u_max: 1.0 },
        state_bounds: Bounds::new(vec![-2.0, -3.0], vec![12.0, 3.0]).unwrap(),
        control_bounds: Bounds::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap(),
        obstacles: vec![Obstacle::Box {
            min: vec![4.0, -1.0],
            max: vec![6.0, 1.0],
            projection: None,
        }],
        x_init: vec![0.0, 0.0],
        goal: GoalRegion::new(vec![goal_x, 0.0], 0.25, vec![0, 1]).unwrap(),
        defaults: PlannerParams {
            t_prop: 1.0,
            c_max: 20.0,
            weights: MetricWeights { w_x: 1.0, w_c: 0.2 },
            resolution: 0.05,
            step: 0.05,
            goal_bias: 0.05,
            adaptive_c_max: true,
            sst_delta_bn: 0.04,
            sst_delta_s: 0.02,
            multi_shrink: 1.0,
            multi_max_rounds: 8,
            pln_bins: 8,
        },
        oracle: OracleKind::ShortestPath,
    }
}

/// 1-D double integrator, rest to a phase-space ball, optimum exactly 4.
///
/// Minimum time from `(0,0)` to `(p,v)` under `|a| <= 1` (reaching forward)
/// is `T(p,v) = 2*sqrt(p + v^2/2) - v`. The goal ball (radius 1/4) is
/// centered at `(4,0) + r * grad T / |grad T|`, so the closest point of the
/// ball in minimum-time terms is exactly `(4,0)` with `T = 4`.
fn di1d_rest_to_rest() -> Scenario {
    // grad T(4,0) = (1/2, -1), |grad| = sqrt(5)/2.
    let g = (0.5_f64, -1.0_f64);
    let norm = (g.0 * g.0 + g.1 * g.1).sqrt();
    let r = 0.25;
    let center = (4.0 + r * g.0 / norm, 0.0 + r * g.1 / norm);
    Scenario {
        schema: SCHEMA_VERSION,
        name: "di1d_rest_to_rest".into(),
        system: SystemSpec::DoubleIntegrator1d,
        state_bounds: Bounds::new(vec![-1.0, -3.0], vec![6.0, 3.0]).unwrap(),
        control_bounds: Bounds::new(vec![-1.0], vec![1.0]).unwrap(),
        obstacles: Vec::new(),
        x_init: vec![0.0, 0.0],
        goal: GoalRegion::new(vec![center.0, center.1], r, vec![0, 1]).unwrap(),
        defaults: PlannerParams {
            t_prop: 1.0,
            c_max: 12.0,
            weights: MetricWeights { w_x: 1.0, w_c: 0.2 },
            resolution: 0.05,
            step: 0.02,
            goal_bias: 0.05,
            adaptive_c_max: true,
            sst_delta_bn: 0.04,
            sst_delta_s: 0.02,
            multi_shrink: 1.0,
            multi_max_rounds: 8,
            pln_bins: 8,
        },
        oracle: OracleKind::MinTime,
    }
}

/// Planar double integrator slalom through two offset walls.
fn di2d_two_boxes() -> Scenario {
    Scenario {
        schema: SCHEMA_VERSION,
        name: "di2d_two_boxes".into(),
        system: SystemSpec::DoubleIntegrator2d,
        state_bounds: Bounds::new(vec![-1.0, -2.0, -2.0, -2.0], vec![9.0, 2.0, 2.0, 2.0])
            .unwrap(),
        control_bounds: Bounds::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap(),
        obstacles: vec![
            Obstacle::Box {
                min: vec![2.5, -2.0],
                max: vec![3.5, 0.8],
                projection: Some(vec![0, 1]),
            },
            Obstacle::Box {
                min: vec![5.0, -0.8],
                max: vec![6.0, 2.0],
                projection: Some(vec![0, 1]),
            },
        ],
        x_init: vec![0.0, 0.0, 0.0, 0.0],
        goal: GoalRegion::new(vec![8.0, 0.0], 0.5, vec![0, 1]).unwrap(),
        defaults: PlannerParams {
            t_prop: 1.0,
            c_max: 24.0,
            weights: MetricWeights { w_x: 1.0, w_c: 0.2 },
            resolution: 0.05,
            step: 0.05,
            goal_bias: 0.05,
            adaptive_c_max: true,
            sst_delta_bn: 0.04,
            sst_delta_s: 0.02,
            multi_shrink: 1.0,
            multi_max_rounds: 8,
            pln_bins: 8,
        },
        oracle: OracleKind::None,
    }
}

/// Kinematic car rounding a wall into a parking ball.
fn car_parking_lite() -> Scenario {
    Scenario {
        schema: SCHEMA_VERSION,
        name: "car_parking_lite".into(),
        system: SystemSpec::KinematicCar { wheelbase: 1.0 },
        state_bounds: Bounds::new(vec![-1.0, -1.0, -4.0], vec![6.0, 4.0, 4.0]).unwrap(),
        control_bounds: Bounds::new(vec![-1.0, -0.6], vec![2.0, 0.6]).unwrap(),
        obstacles: vec![Obstacle::Box {
            min: vec![2.0, -1.0],
            max: vec![2.4, 2.0],
            projection: Some(vec![0, 1]),
        }],
        x_init: vec![0.5, 0.5, 0.0],
        goal: GoalRegion::new(vec![4.5, 2.8], 0.4, vec![0, 1]).unwrap(),
        defaults: PlannerParams {
            t_prop: 1.0,
            c_max: 20.0,
            weights: MetricWeights { w_x: 1.0, w_c: 0.2 },
            resolution: 0.05,
            step: 0.02,
            goal_bias: 0.05,
            adaptive_c_max: true,
            sst_delta_bn: 0.04,
            sst_delta_s: 0.02,
            multi_shrink: 1.0,
            multi_max_rounds: 8,
            pln_bins: 8,
        },
        oracle: OracleKind::None,
    }
}
