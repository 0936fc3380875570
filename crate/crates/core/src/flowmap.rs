//! Fixed-step RK4 trajectories, flow-map gradients, Cauchy-Green tensors and FTLE.

use crate::error::{Error, Result};
use crate::strain::{sample_grid, Grid2D, ScalarField, SymTensor2};
use crate::vectorfield::{Mat2, VectorField2D};
use crate::Point;

/// Default offset for centered differences of the flow map.
pub const DEFAULT_DELTA: f64 = 1e-5;

/// Smallest Cauchy-Green eigenvalue passed to the logarithm.
pub const EIGENVALUE_FLOOR: f64 = 1e-300;

const MAX_STEPS: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Magnitude of the RK4 step; the sign follows the requested time.
    pub step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { step: 1e-3 }
    }
}

impl IntegratorConfig {
    pub fn new(step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::invalid(format!("integrator step must be positive, got {step}")));
        }
        Ok(IntegratorConfig { step })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Point>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Point] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end(&self) -> Point {
        *self.states.last().expect("trajectory holds the initial state")
    }
}

/// One classical RK4 step of signed length `dt`.
pub fn rk4_step(f: &VectorField2D, x: Point, dt: f64) -> Result<Point> {
    let at = |p: Point, k: Point, s: f64| [p[0] + s * k[0], p[1] + s * k[1]];
    let ev = |p: Point| -> Result<Point> {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(Error::NonFinite(format!("RK4 stage near ({}, {})", x[0], x[1])));
        }
        let v = f.eval(p)?;
        if !(v[0].is_finite() && v[1].is_finite()) {
            return Err(Error::NonFinite(format!("velocity at ({}, {})", p[0], p[1])));
        }
        Ok(v)
    };
    let k1 = ev(x)?;
    let k2 = ev(at(x, k1, 0.5 * dt))?;
    let k3 = ev(at(x, k2, 0.5 * dt))?;
    let k4 = ev(at(x, k3, dt))?;
    let next = [
        x[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ];
    if !(next[0].is_finite() && next[1].is_finite()) {
        return Err(Error::NonFinite(format!("RK4 state after step from ({}, {})", x[0], x[1])));
    }
    f.check_domain(next)?;
    Ok(next)
}

/// Time nodes `0, h, 2h, ..., t` (signed); the last interval may be shorter.
pub(crate) fn time_nodes(t: f64, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    if !t.is_finite() {
        return Err(Error::invalid("integration time must be finite"));
    }
    let ratio = t.abs() / cfg.step;
    if ratio > MAX_STEPS {
        return Err(Error::invalid(format!("|t|/step = {ratio:e} exceeds 1e8")));
    }
    let n = (ratio - 1e-9).ceil().max(0.0) as usize;
    let h = cfg.step.copysign(t);
    let mut nodes: Vec<f64> = (0..n).map(|k| k as f64 * h).collect();
    nodes.push(t);
    if n == 0 {
        nodes[0] = 0.0;
        nodes.truncate(1);
        if t != 0.0 {
            nodes.push(t);
        }
    }
    Ok(nodes)
}

/// RK4 trajectory from `x0` to time `t` (either sign).
pub fn integrate(f: &VectorField2D, x0: Point, t: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    f.check_domain(x0)?;
    let times = time_nodes(t, cfg)?;
    let mut states = Vec::with_capacity(times.len());
    states.push(x0);
    for w in times.windows(2) {
        let next = rk4_step(f, *states.last().expect("nonempty"), w[1] - w[0])?;
        states.push(next);
    }
    Ok(Trajectory { times, states })
}

/// Flow-map endpoint `F_t(x0)` without storing the trajectory.
pub fn flow(f: &VectorField2D, x0: Point, t: f64, cfg: &IntegratorConfig) -> Result<Point> {
    f.check_domain(x0)?;
    let times = time_nodes(t, cfg)?;
    times
        .windows(2)
        .try_fold(x0, |x, w| rk4_step(f, x, w[1] - w[0]))
}

/// Flow-map gradient by centered differences with offset `delta`.
pub fn flow_gradient(
    f: &VectorField2D,
    x0: Point,
    t: f64,
    delta: f64,
    cfg: &IntegratorConfig,
) -> Result<Mat2> {
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("finite-difference offset must be positive, got {delta}")));
    }
    let column = |e: Point| -> Result<Point> {
        let plus = flow(f, [x0[0] + delta * e[0], x0[1] + delta * e[1]], t, cfg)?;
        let minus = flow(f, [x0[0] - delta * e[0], x0[1] - delta * e[1]], t, cfg)?;
        Ok([(plus[0] - minus[0]) / (2.0 * delta), (plus[1] - minus[1]) / (2.0 * delta)])
    };
    Ok(Mat2::from_columns(column([1.0, 0.0])?, column([0.0, 1.0])?))
}

/// Right Cauchy-Green tensor `C_t = (grad F_t)^T grad F_t`.
pub fn cauchy_green(
    f: &VectorField2D,
    x0: Point,
    t: f64,
    delta: f64,
    cfg: &IntegratorConfig,
) -> Result<SymTensor2> {
    Ok(SymTensor2::gram(&flow_gradient(f, x0, t, delta, cfg)?))
}

fn ftle_from_tensor(c: &SymTensor2, t: f64) -> f64 {
    let (_, l2) = c.eigenvalues();
    l2.max(EIGENVALUE_FLOOR).ln() / (2.0 * t.abs())
}

/// Finite-time Lyapunov exponent `log(lambda_max(C_t)) / (2|t|)`.
pub fn ftle(f: &VectorField2D, x0: Point, t: f64, delta: f64, cfg: &IntegratorConfig) -> Result<f64> {
    if t == 0.0 {
        return Err(Error::invalid("FTLE is undefined for t = 0"));
    }
    Ok(ftle_from_tensor(&cauchy_green(f, x0, t, delta, cfg)?, t))
}

/// FTLE at every node of `grid`.
pub fn ftle_field(
    f: &VectorField2D,
    grid: &Grid2D,
    t: f64,
    delta: f64,
    cfg: &IntegratorConfig,
) -> Result<ScalarField> {
    if t == 0.0 {
        return Err(Error::invalid("FTLE is undefined for t = 0"));
    }
    sample_grid(grid, |pt| ftle(f, pt, t, delta, cfg))
}

/// Closed-form Cauchy-Green tensor of the saddle.
pub fn saddle_cauchy_green(pt: Point, t: f64) -> Result<SymTensor2> {
    VectorField2D::Saddle.check_domain(pt)?;
    let y2 = pt[1] * pt[1];
    let d = (1.0 - y2) * (2.0 * t).exp() + y2;
    Ok(SymTensor2 { sxx: (2.0 * t).exp(), sxy: 0.0, syy: (4.0 * t).exp() / (d * d * d) })
}

/// Closed-form FTLE of the saddle (largest eigenvalue of [`saddle_cauchy_green`]).
pub fn saddle_ftle(pt: Point, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Err(Error::invalid("FTLE is undefined for t = 0"));
    }
    Ok(ftle_from_tensor(&saddle_cauchy_green(pt, t)?, t))
}
