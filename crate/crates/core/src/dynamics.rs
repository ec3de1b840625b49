//! System dynamics and numerical propagation.
//!
//! A system contributes `f` (state derivative) and `g` (running cost rate,
//! non-negative). Propagation integrates the joint ODE `(dx, dc) = (f, g)`
//! with fixed-step RK4, shrinking the final step to land exactly on the
//! requested duration. The cost coordinate is integrated inside the same
//! RK4 pass as the state — the augmented system is literally what the
//! integrator sees — with two deliberate consequences:
//!
//! * the state component of an augmented propagation is arithmetic-for-
//!   arithmetic identical to a state-only propagation (`g` never feeds back
//!   into `f`), so replaying a control schedule reproduces states bit for
//!   bit;
//! * the cost increment is accumulated starting from zero and added to the
//!   parent's cost in a single operation, so `child.c == parent.c + edge
//!   cost` holds exactly, with no drift to within zero ulps.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{sample_box, RandomStream, StreamPurpose};
use crate::types::{AugmentedState, Bounds, Control, ControlSegment, State, Trajectory};

/// Continuous-time system dynamics with a running cost rate.
///
/// `g` must be non-negative everywhere on the bounded domain; planners rely
/// on accumulated cost being monotone along tree paths.
pub trait Dynamics {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;
    /// State derivative: writes `dx/dt` for state `x` under control `u`.
    fn f(&self, x: &[f64], u: &[f64], out: &mut [f64]);
    /// Cost rate at `(x, u)`; must be `>= 0`.
    fn g(&self, x: &[f64], u: &[f64]) -> f64;
}

/// Known Lipschitz constants of a system on its bounded domain, used to
/// sanity-check empirical estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzDecl {
    pub k_x_f: f64,
    pub k_u_f: f64,
    pub k_x_g: f64,
    pub k_u_g: f64,
}

/// A system plus the box bounds that make its planning domain compact.
#[derive(Clone)]
pub struct SystemDefinition {
    pub name: String,
    pub dynamics: Arc<dyn Dynamics + Send + Sync>,
    pub state_bounds: Bounds,
    pub control_bounds: Bounds,
    /// Declared Lipschitz constants, when known analytically.
    pub lipschitz: Option<LipschitzDecl>,
}

impl std::fmt::Debug for SystemDefinition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SystemDefinition")
            .field("name", &self.name)
            .field("state_bounds", &self.state_bounds)
            .field("control_bounds", &self.control_bounds)
            .finish()
    }
}

impl SystemDefinition {
    pub fn new(
        name: impl Into<String>,
        dynamics: Arc<dyn Dynamics + Send + Sync>,
        state_bounds: Bounds,
        control_bounds: Bounds,
        lipschitz: Option<LipschitzDecl>,
    ) -> Result<Self> {
        state_bounds.validate()?;
        control_bounds.validate()?;
        if state_bounds.dim() != dynamics.state_dim() {
            return Err(Error::DimensionMismatch {
                expected: dynamics.state_dim(),
                got: state_bounds.dim(),
            });
        }
        if control_bounds.dim() != dynamics.control_dim() {
            return Err(Error::DimensionMismatch {
                expected: dynamics.control_dim(),
                got: control_bounds.dim(),
            });
        }
        Ok(Self { name: name.into(), dynamics, state_bounds, control_bounds, lipschitz })
    }

    pub fn state_dim(&self) -> usize {
        self.dynamics.state_dim()
    }

    pub fn control_dim(&self) -> usize {
        self.dynamics.control_dim()
    }

    /// Spot-check that `f` is finite and `g` is finite and non-negative on
    /// sampled points of the bounded domain.
    pub fn validate_sampled(&self, stream: &RandomStream, samples: usize) -> Result<()> {
        let mut rng = stream.substream(StreamPurpose::StateSampling);
        let mut out = vec![0.0; self.state_dim()];
        for _ in 0..samples {
            let x = sample_box(&mut rng, &self.state_bounds);
            let u = sample_box(&mut rng, &self.control_bounds);
            self.dynamics.f(&x, &u, &mut out);
            if out.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parameter(format!(
                    "system `{}` produced a non-finite derivative at x={x:?}, u={u:?}",
                    self.name
                )));
            }
            let g = self.dynamics.g(&x, &u);
            if !g.is_finite() || g < 0.0 {
                return Err(Error::Parameter(format!(
                    "system `{}` cost rate must be finite and >= 0, got {g} at x={x:?}, u={u:?}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Fixed-step RK4 configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Nominal step size; the final step of a propagation shrinks to land
    /// exactly on the requested duration.
    pub step: f64,
    /// Upper bound on a single propagation's duration; longer requests are
    /// parameter errors.
    pub max_duration: f64,
}

impl IntegratorConfig {
    pub fn new(step: f64, max_duration: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Parameter(format!("integrator step must be > 0, got {step}")));
        }
        if !(max_duration > 0.0) || !max_duration.is_finite() {
            return Err(Error::Parameter(format!(
                "max propagation duration must be > 0, got {max_duration}"
            )));
        }
        Ok(Self { step, max_duration })
    }

    /// Default step for a given propagation horizon: fine enough to resolve
    /// short segments, capped at 0.02 s.
    pub fn default_step(t_prop: f64) -> f64 {
        (t_prop / 20.0).min(0.02)
    }
}

/// Reusable propagation engine: owns the RK4 scratch buffers so the planner
/// inner loop does not allocate.
#[derive(Debug, Clone)]
pub struct Integrator {
    pub cfg: IntegratorConfig,
    z: Vec<f64>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

impl Integrator {
    pub fn new(cfg: IntegratorConfig) -> Self {
        Self {
            cfg,
            z: Vec::new(),
            k1: Vec::new(),
            k2: Vec::new(),
            k3: Vec::new(),
            k4: Vec::new(),
            stage: Vec::new(),
        }
    }

    fn ensure_dim(&mut self, dim: usize) {
        self.z.resize(dim, 0.0);
        self.k1.resize(dim, 0.0);
        self.k2.resize(dim, 0.0);
        self.k3.resize(dim, 0.0);
        self.k4.resize(dim, 0.0);
        self.stage.resize(dim, 0.0);
    }

    fn check_duration(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Parameter(format!("propagation duration must be >= 0, got {t}")));
        }
        if t > self.cfg.max_duration {
            return Err(Error::Parameter(format!(
                "propagation duration {t} exceeds the configured maximum {}",
                self.cfg.max_duration
            )));
        }
        Ok(())
    }

    /// Core stepping loop over a `dim`-dimensional derivative. Emits one
    /// sample per completed step via `on_sample(time, z)`.
    fn run<D, S>(&mut self, dim: usize, t: f64, mut deriv: D, mut on_sample: S) -> Result<()>
    where
        D: FnMut(&[f64], &mut [f64]),
        S: FnMut(f64, &[f64]),
    {
        let h = self.cfg.step;
        let n_steps = if t == 0.0 { 0 } else { (t / h).ceil() as usize };
        for i in 0..n_steps {
            let t_end = if i + 1 == n_steps { t } else { h * (i + 1) as f64 };
            let hs = t_end - h * i as f64;
            // Classic RK4 over the step [t_i, t_i + hs].
            deriv(&self.z, &mut self.k1);
            for j in 0..dim {
                self.stage[j] = self.z[j] + 0.5 * hs * self.k1[j];
            }
            deriv(&self.stage, &mut self.k2);
            for j in 0..dim {
                self.stage[j] = self.z[j] + 0.5 * hs * self.k2[j];
            }
            deriv(&self.stage, &mut self.k3);
            for j in 0..dim {
                self.stage[j] = self.z[j] + hs * self.k3[j];
            }
            deriv(&self.stage, &mut self.k4);
            for j in 0..dim {
                self.z[j] += hs / 6.0
                    * (self.k1[j] + 2.0 * self.k2[j] + 2.0 * self.k3[j] + self.k4[j]);
            }
            if self.z.iter().any(|v| !v.is_finite()) {
                return Err(Error::PropagationDiverged(format!(
                    "non-finite state after step {} of {}",
                    i + 1,
                    n_steps
                )));
            }
            on_sample(t_end, &self.z);
        }
        Ok(())
    }

    /// State-only propagation of `x` under constant control `u` for duration
    /// `t`. The resulting trajectory's `cost` field is left at zero; use
    /// [`propagate_augmented_into`](Self::propagate_augmented_into) when
    /// accumulated cost matters.
    pub fn propagate_into(
        &mut self,
        sys: &SystemDefinition,
        x: &[f64],
        u: &[f64],
        t: f64,
        traj: &mut Trajectory,
    ) -> Result<()> {
        self.check_duration(t)?;
        let d = sys.state_dim();
        check_dims(d, x.len(), sys.control_dim(), u.len())?;
        self.ensure_dim(d);
        self.z[..d].copy_from_slice(x);
        traj.reset(x);

        let dynamics = &sys.dynamics;
        self.run(
            d,
            t,
            |z, out| dynamics.f(z, u, out),
            |time, z| traj.append_sample(time, z),
        )?;
        traj.segments.push(ControlSegment { control: Control(u.to_vec()), duration: t });
        Ok(())
    }

    /// Joint propagation of the augmented point `(x, c)`: integrates state
    /// and cost in one RK4 pass, samples the state path into `traj`, and
    /// returns the successor augmented state. `traj.cost` receives the cost
    /// increment of this segment alone; the returned state's cost is
    /// `y.c + traj.cost` computed in a single addition.
    pub fn propagate_augmented_into(
        &mut self,
        sys: &SystemDefinition,
        y: &AugmentedState,
        u: &[f64],
        t: f64,
        traj: &mut Trajectory,
    ) -> Result<AugmentedState> {
        self.check_duration(t)?;
        let d = sys.state_dim();
        check_dims(d, y.x.dim(), sys.control_dim(), u.len())?;
        let dim = d + 1;
        self.ensure_dim(dim);
        self.z[..d].copy_from_slice(y.x.as_slice());
        self.z[d] = 0.0; // cost increment integrates from zero
        traj.reset(y.x.as_slice());

        let dynamics = &sys.dynamics;
        self.run(
            dim,
            t,
            |z, out| {
                let (xs, _) = z.split_at(d);
                let (fx, gc) = out.split_at_mut(d);
                dynamics.f(xs, u, fx);
                gc[0] = dynamics.g(xs, u);
            },
            |time, z| traj.append_sample(time, &z[..d]),
        )?;
        traj.segments.push(ControlSegment { control: Control(u.to_vec()), duration: t });
        let increment = self.z[d];
        if increment < 0.0 {
            return Err(Error::PropagationDiverged(format!(
                "cost increment must be non-negative, got {increment}"
            )));
        }
        traj.cost = increment;
        let x_new = State(self.z[..d].to_vec());
        Ok(AugmentedState::new(x_new, y.c + increment))
    }
}

fn check_dims(d: usize, xd: usize, cd: usize, ud: usize) -> Result<()> {
    if xd != d {
        return Err(Error::DimensionMismatch { expected: d, got: xd });
    }
    if ud != cd {
        return Err(Error::DimensionMismatch { expected: cd, got: ud });
    }
    Ok(())
}

/// Convenience wrapper over [`Integrator::propagate_into`].
pub fn propagate(
    sys: &SystemDefinition,
    x: &State,
    u: &Control,
    t: f64,
    cfg: IntegratorConfig,
) -> Result<Trajectory> {
    let mut integ = Integrator::new(cfg);
    let mut traj = Trajectory::empty(sys.state_dim());
    integ.propagate_into(sys, x.as_slice(), u.as_slice(), t, &mut traj)?;
    Ok(traj)
}

/// Convenience wrapper over [`Integrator::propagate_augmented_into`].
pub fn propagate_augmented(
    sys: &SystemDefinition,
    y: &AugmentedState,
    u: &Control,
    t: f64,
    cfg: IntegratorConfig,
) -> Result<(AugmentedState, Trajectory)> {
    let mut integ = Integrator::new(cfg);
    let mut traj = Trajectory::empty(sys.state_dim());
    let y_new = integ.propagate_augmented_into(sys, y, u.as_slice(), t, &mut traj)?;
    Ok((y_new, traj))
}

/// Recompute a trajectory's accumulated cost from its stored samples and
/// control schedule, using the same per-step RK4 quadrature as propagation.
///
/// For a trajectory produced by [`propagate_augmented`] this reproduces
/// `traj.cost` exactly (same stage arithmetic, same summation order); the
/// contract for callers is agreement within 1e-9 relative. Sample intervals
/// must align with segment boundaries, otherwise the schedule is rejected.
pub fn trajectory_cost(
    sys: &SystemDefinition,
    traj: &Trajectory,
    _cfg: IntegratorConfig,
) -> Result<f64> {
    traj.validate()?;
    let d = sys.state_dim();
    if traj.dim != d {
        return Err(Error::DimensionMismatch { expected: d, got: traj.dim });
    }
    let horizon = traj.duration();
    let tol = 1e-9 * horizon.max(1.0);

    let mut total = 0.0;
    let mut seg_idx = 0usize;
    let mut seg_start = 0.0;
    let mut seg_end = traj.segments.first().map_or(0.0, |s| s.duration);
    let mut k = [0.0; 4];
    let mut fx = vec![0.0; d];
    let mut stage = vec![0.0; d];

    for i in 0..traj.len() - 1 {
        let (t0, x0) = traj.sample(i);
        let (t1, _) = traj.sample(i + 1);
        // Advance to the segment covering this interval.
        while t0 >= seg_end - tol && seg_idx + 1 < traj.segments.len() {
            seg_idx += 1;
            seg_start = seg_end;
            seg_end = seg_start + traj.segments[seg_idx].duration;
        }
        if t0 < seg_start - tol || t1 > seg_end + tol {
            return Err(Error::Parameter(format!(
                "sample interval [{t0}, {t1}] is not covered by segment {seg_idx} \
                 ([{seg_start}, {seg_end}]): segments inconsistent with samples"
            )));
        }
        let u = traj.segments[seg_idx].control.as_slice();
        let hs = t1 - t0;
        // One joint RK4 step's cost row, re-evaluated from the stored state.
        sys.dynamics.f(x0, u, &mut fx);
        k[0] = sys.dynamics.g(x0, u);
        for j in 0..d {
            stage[j] = x0[j] + 0.5 * hs * fx[j];
        }
        sys.dynamics.f(&stage, u, &mut fx);
        k[1] = sys.dynamics.g(&stage, u);
        for j in 0..d {
            stage[j] = x0[j] + 0.5 * hs * fx[j];
        }
        sys.dynamics.f(&stage, u, &mut fx);
        k[2] = sys.dynamics.g(&stage, u);
        for j in 0..d {
            stage[j] = x0[j] + hs * fx[j];
        }
        k[3] = sys.dynamics.g(&stage, u);
        total += hs / 6.0 * (k[0] + 2.0 * k[1] + 2.0 * k[2] + k[3]);
    }
    Ok(total)
}

/// Empirical Lipschitz estimates from random pair sampling.
#[derive(Debug, Clone, Copy)]
pub struct LipschitzReport {
    /// max over pairs of |f(x0,u)-f(x1,u)| / |x0-x1|
    pub k_x_f: f64,
    /// max over pairs of |f(x,u0)-f(x,u1)| / |u0-u1|
    pub k_u_f: f64,
    pub k_x_g: f64,
    pub k_u_g: f64,
    /// max over augmented pairs of |F(y0,u)-F(y1,u)| / |y0-y1|
    pub k_y_aug: f64,
    /// max over control pairs of |F(y,u0)-F(y,u1)| / |u0-u1|
    pub k_u_aug: f64,
    pub pairs: usize,
}

impl LipschitzReport {
    /// Composite bound on the augmented control constant implied by the
    /// per-component estimates: `sqrt(k_u_f^2 + k_u_g^2)`.
    pub fn composite_u(&self) -> f64 {
        (self.k_u_f * self.k_u_f + self.k_u_g * self.k_u_g).sqrt()
    }

    /// Composite bound on the augmented state-variation constant:
    /// `sqrt(k_x_f^2 + k_x_g^2)` (the augmented denominator only grows, so
    /// the state-only constants remain valid).
    pub fn composite_y(&self) -> f64 {
        (self.k_x_f * self.k_x_f + self.k_x_g * self.k_x_g).sqrt()
    }

    /// Whether the directly-measured augmented constants respect the
    /// composite bounds (they must, up to rounding).
    pub fn consistent(&self) -> bool {
        let tol = 1e-9;
        self.k_y_aug <= self.composite_y() * (1.0 + tol) + tol
            && self.k_u_aug <= self.composite_u() * (1.0 + tol) + tol
    }
}

/// Estimate Lipschitz constants of `f`, `g`, and the joint map `F = (f, g)`
/// by sampling `pairs` random perturbation pairs inside the system bounds.
///
/// This is a measurement, not a certificate: results are reported for
/// comparison against declared constants and composite bounds.
pub fn verify_lipschitz(
    sys: &SystemDefinition,
    stream: &RandomStream,
    pairs: usize,
) -> Result<LipschitzReport> {
    let d = sys.state_dim();
    let m = sys.control_dim();
    let mut rng = stream.substream(StreamPurpose::StateSampling);
    let mut f0 = vec![0.0; d];
    let mut f1 = vec![0.0; d];
    let (mut k_x_f, mut k_u_f, mut k_x_g, mut k_u_g) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut k_y_aug, mut k_u_aug) = (0.0f64, 0.0f64);
    // Accumulated cost plays no role in the dynamics, but it belongs to the
    // augmented point, so pairs get distinct cost coordinates too.
    let c_span = 1.0;

    for _ in 0..pairs {
        let x0 = sample_box(&mut rng, &sys.state_bounds);
        let x1 = sample_box(&mut rng, &sys.state_bounds);
        let u0 = sample_box(&mut rng, &sys.control_bounds);
        let u1 = sample_box(&mut rng, &sys.control_bounds);
        let c0: f64 = rng.random_range(0.0..c_span);
        let c1: f64 = rng.random_range(0.0..c_span);

        // State variation at fixed control.
        let dx = norm_diff(&x0, &x1);
        if dx > 1e-12 {
            sys.dynamics.f(&x0, &u0, &mut f0);
            sys.dynamics.f(&x1, &u0, &mut f1);
            let df = norm_diff(&f0, &f1);
            let dg = (sys.dynamics.g(&x0, &u0) - sys.dynamics.g(&x1, &u0)).abs();
            k_x_f = k_x_f.max(df / dx);
            k_x_g = k_x_g.max(dg / dx);
            // Joint map under augmented distance: the denominator includes
            // the cost gap, the numerator does not depend on it.
            let dc = c0 - c1;
            let dy = (dx * dx + dc * dc).sqrt();
            let df_aug = (df * df + dg * dg).sqrt();
            k_y_aug = k_y_aug.max(df_aug / dy);
        }

        // Control variation at fixed state.
        let du = norm_diff(&u0, &u1);
        if du > 1e-12 {
            sys.dynamics.f(&x0, &u0, &mut f0);
            sys.dynamics.f(&x0, &u1, &mut f1);
            let df = norm_diff(&f0, &f1);
            let dg = (sys.dynamics.g(&x0, &u0) - sys.dynamics.g(&x0, &u1)).abs();
            k_u_f = k_u_f.max(df / du);
            k_u_g = k_u_g.max(dg / du);
            k_u_aug = k_u_aug.max((df * df + dg * dg).sqrt() / du);
        }
    }
    let _ = m;
    Ok(LipschitzReport { k_x_f, k_u_f, k_x_g, k_u_g, k_y_aug, k_u_aug, pairs })
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// Built-in systems
// ---------------------------------------------------------------------------

/// Velocity-controlled planar point with speed saturated to `|u| <= u_max`;
/// cost rate 1 (elapsed time). Saturation keeps the Euclidean speed bound
/// exact even though controls are sampled from a box.
#[derive(Debug, Clone)]
pub struct SingleIntegrator2d {
    pub u_max: f64,
}

impl Dynamics for SingleIntegrator2d {
    fn state_dim(&self) -> usize {
        2
    }
    fn control_dim(&self) -> usize {
        2
    }
    fn f(&self, _x: &[f64], u: &[f64], out: &mut [f64]) {
        let n2 = u[0] * u[0] + u[1] * u[1];
        let max2 = self.u_max * self.u_max;
        if n2 > max2 {
            let s = self.u_max / n2.sqrt();
            out[0] = u[0] * s;
            out[1] = u[1] * s;
        } else {
            out[0] = u[0];
            out[1] = u[1];
        }
    }
    fn g(&self, _x: &[f64], _u: &[f64]) -> f64 {
        1.0
    }
}

/// One-dimensional double integrator: state `(p, v)`, control `(a)`,
/// cost rate 1.
#[derive(Debug, Clone)]
pub struct DoubleIntegrator1d;

impl Dynamics for DoubleIntegrator1d {
    fn state_dim(&self) -> usize {
        2
    }
    fn control_dim(&self) -> usize {
        1
    }
    fn f(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        out[0] = x[1];
        out[1] = u[0];
    }
    fn g(&self, _x: &[f64], _u: &[f64]) -> f64 {
        1.0
    }
}

/// Planar double integrator: state `(px, py, vx, vy)`, control `(ax, ay)`,
/// cost rate 1.
#[derive(Debug, Clone)]
pub struct DoubleIntegrator2d;

impl Dynamics for DoubleIntegrator2d {
    fn state_dim(&self) -> usize {
        4
    }
    fn control_dim(&self) -> usize {
        2
    }
    fn f(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        out[0] = x[2];
        out[1] = x[3];
        out[2] = u[0];
        out[3] = u[1];
    }
    fn g(&self, _x: &[f64], _u: &[f64]) -> f64 {
        1.0
    }
}

/// Kinematic car: state `(x, y, heading)`, control `(speed, steering)`,
/// cost rate 1. Steering is the front-wheel angle of a wheelbase-`L`
/// bicycle model.
#[derive(Debug, Clone)]
pub struct KinematicCar {
    pub wheelbase: f64,
}

impl Dynamics for KinematicCar {
    fn state_dim(&self) -> usize {
        3
    }
    fn control_dim(&self) -> usize {
        2
    }
    fn f(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        let (v, phi) = (u[0], u[1]);
        out[0] = v * x[2].cos();
        out[1] = v * x[2].sin();
        out[2] = v * phi.tan() / self.wheelbase;
    }
    fn g(&self, _x: &[f64], _u: &[f64]) -> f64 {
        1.0
    }
}
