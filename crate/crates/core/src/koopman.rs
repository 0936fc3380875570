//! Koopman generator action, eigenfunction residuals and pullback construction.

use rayon::prelude::*;
use serde::Serialize;

use crate::dual::{Dual2, Scalar};
use crate::error::{Error, Result};
use crate::expr::{Poly2, Var};
use crate::flowmap::{flow, rk4_step, time_nodes, IntegratorConfig};
use crate::strain::RateKind;
use crate::vectorfield::VectorField2D;
use crate::Point;

/// Below this value of `|n . v| / |v|` a crossing of the data line is flagged as tangential.
pub const TRANSVERSE_TOL: f64 = 1e-6;

/// A real-valued function of the plane with a gradient.
pub trait Observable: Sync {
    fn value(&self, pt: Point) -> Result<f64>;

    /// Defaults to centered differences.
    fn gradient(&self, pt: Point) -> Result<Point> {
        let hx = 1e-6 * pt[0].abs().max(1.0);
        let hy = 1e-6 * pt[1].abs().max(1.0);
        let gx = (self.value([pt[0] + hx, pt[1]])? - self.value([pt[0] - hx, pt[1]])?) / (2.0 * hx);
        let gy = (self.value([pt[0], pt[1] + hy])? - self.value([pt[0], pt[1] - hy])?) / (2.0 * hy);
        Ok([gx, gy])
    }
}

impl Observable for Poly2 {
    fn value(&self, pt: Point) -> Result<f64> {
        Ok(self.eval(pt))
    }

    fn gradient(&self, pt: Point) -> Result<Point> {
        let (x, y) = Dual2::variables(pt);
        Ok(self.eval_scalar(x, y).d)
    }
}

impl<T: Observable + ?Sized> Observable for &T {
    fn value(&self, pt: Point) -> Result<f64> {
        (**self).value(pt)
    }
    fn gradient(&self, pt: Point) -> Result<Point> {
        (**self).gradient(pt)
    }
}

impl<T: Observable + ?Sized + Send> Observable for Box<T> {
    fn value(&self, pt: Point) -> Result<f64> {
        (**self).value(pt)
    }
    fn gradient(&self, pt: Point) -> Result<Point> {
        (**self).gradient(pt)
    }
}

/// A polynomial data function `h(s) = sum c_k s^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataFunction {
    coeffs: Vec<f64>,
}

impl DataFunction {
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        DataFunction { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        DataFunction { coeffs: vec![c] }
    }

    /// `h(s) = s^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        DataFunction { coeffs }
    }

    /// Takes the `x`-only polynomial `p` as a polynomial in `s`.
    pub fn from_poly(p: &Poly2) -> Result<Self> {
        if !p.is_univariate_x() {
            return Err(Error::invalid(format!("data function must be univariate, got {p}")));
        }
        let n = p.degree().unwrap_or(0) as usize;
        Ok(DataFunction { coeffs: (0..=n).map(|i| p.coeff(i as u32, 0)).collect() })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().skip(1).all(|&c| c == 0.0)
    }

    pub fn eval<S: Scalar>(&self, s: S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::from_f64(0.0), |acc, &c| acc * s + S::from_f64(c))
    }
}

/// A trial eigenpair `(g, lambda)`.
#[derive(Debug, Clone)]
pub struct KeigCandidate<O = Poly2> {
    pub observable: O,
    pub lambda: f64,
}

impl<O: Observable> KeigCandidate<O> {
    pub fn new(observable: O, lambda: f64) -> Self {
        KeigCandidate { observable, lambda }
    }
}

/// The saddle eigenfunction `h(x sqrt(w)) w^(-lambda/2)` with `w = 3y^2/(1-y^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleEigenfunction {
    pub h: DataFunction,
    pub lambda: f64,
}

impl SaddleEigenfunction {
    pub fn new(h: DataFunction, lambda: f64) -> Self {
        SaddleEigenfunction { h, lambda }
    }

    fn check(&self, pt: Point) -> Result<()> {
        VectorField2D::Saddle.check_domain(pt)?;
        // y = 0 is only harmless when nothing depends on w
        if pt[1] == 0.0 && !(self.lambda == 0.0 && self.h.is_constant()) {
            return Err(Error::Domain { what: "the saddle eigenfunction (y != 0)", x: pt[0], y: pt[1] });
        }
        Ok(())
    }

    fn eval<S: Scalar>(&self, x: S, y: S) -> S {
        let one = S::from_f64(1.0);
        let w = S::from_f64(3.0) * y * y / (one - y * y);
        self.h.eval(x * w.sqrt()) * w.powf(-0.5 * self.lambda)
    }
}

impl Observable for SaddleEigenfunction {
    fn value(&self, pt: Point) -> Result<f64> {
        self.check(pt)?;
        let v = self.eval(pt[0], pt[1]);
        finite(v, pt)
    }

    fn gradient(&self, pt: Point) -> Result<Point> {
        self.check(pt)?;
        let (x, y) = Dual2::variables(pt);
        let g = self.eval(x, y).d;
        finite(g[0], pt)?;
        finite(g[1], pt)?;
        Ok(g)
    }
}

fn finite(v: f64, pt: Point) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("observable at ({}, {})", pt[0], pt[1])))
    }
}

/// Closed-form saddle eigenfunction at `pt`.
pub fn saddle_eigenfunction(h: &DataFunction, lambda: f64, pt: Point) -> Result<f64> {
    SaddleEigenfunction::new(h.clone(), lambda).value(pt)
}

/// `L g = u g_x + v g_y`, exactly.
pub fn generator_apply(f: &VectorField2D, g: &Poly2) -> Poly2 {
    let (u, v) = f.components();
    &(&u * &g.differentiate(Var::X)) + &(&v * &g.differentiate(Var::Y))
}

/// Exact residual `L g - lambda g`.
pub fn keig_residual(f: &VectorField2D, cand: &KeigCandidate<Poly2>) -> Poly2 {
    &generator_apply(f, &cand.observable) - &cand.observable.scale(cand.lambda)
}

/// `L g - lambda g` at one point, for any observable.
pub fn keig_residual_at<O: Observable>(f: &VectorField2D, cand: &KeigCandidate<O>, pt: Point) -> Result<f64> {
    let v = f.eval(pt)?;
    let g = cand.observable.gradient(pt)?;
    Ok(v[0] * g[0] + v[1] * g[1] - cand.lambda * cand.observable.value(pt)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub lambda: f64,
    pub max_abs_residual: f64,
    pub rms_residual: f64,
    pub samples: usize,
}

/// Pointwise residual statistics over `samples`.
pub fn residual_report<O: Observable>(
    f: &VectorField2D,
    cand: &KeigCandidate<O>,
    samples: &[Point],
) -> Result<ResidualReport> {
    if samples.is_empty() {
        return Err(Error::invalid("no sample points"));
    }
    let r: Vec<Result<f64>> = samples.par_iter().map(|&p| keig_residual_at(f, cand, p)).collect();
    let r = r.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(ResidualReport {
        lambda: cand.lambda,
        max_abs_residual: r.iter().fold(0.0, |m, v| m.max(v.abs())),
        rms_residual: (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt(),
        samples: r.len(),
    })
}

/// Least-squares eigenvalue `sum(Lg g) / sum(g^2)` and the RMS residual there.
pub fn best_lambda<O: Observable>(f: &VectorField2D, g: &O, samples: &[Point]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::invalid("best_lambda needs at least two samples"));
    }
    let pairs: Vec<Result<(f64, f64)>> = samples
        .par_iter()
        .map(|&p| {
            let v = f.eval(p)?;
            let d = g.gradient(p)?;
            Ok((v[0] * d[0] + v[1] * d[1], g.value(p)?))
        })
        .collect();
    let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
    let gg: f64 = pairs.iter().map(|(_, g)| g * g).sum();
    if gg == 0.0 {
        return Err(Error::invalid("observable vanishes at every sample"));
    }
    let lambda = pairs.iter().map(|(lg, g)| lg * g).sum::<f64>() / gg;
    let ss: f64 = pairs.iter().map(|(lg, g)| (lg - lambda * g).powi(2)).sum();
    Ok((lambda, (ss / pairs.len() as f64).sqrt()))
}

/// Relative defect `|g(F_t x0) - e^(lambda t) g(x0)| / |g(x0)|` along an RK4 orbit.
pub fn evolution_check<O: Observable>(
    f: &VectorField2D,
    cand: &KeigCandidate<O>,
    x0: Point,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let g0 = cand.observable.value(x0)?;
    if g0 == 0.0 {
        return Err(Error::invalid("observable vanishes at the starting point"));
    }
    let end = flow(f, x0, t, cfg)?;
    let g1 = cand.observable.value(end)?;
    Ok((g1 - (cand.lambda * t).exp() * g0).abs() / g0.abs())
}

/// A straight data line carrying `h` as a function of signed arclength from `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSurface {
    base: Point,
    direction: Point,
    h: DataFunction,
}

impl DataSurface {
    pub fn new(base: Point, direction: Point, h: DataFunction) -> Result<Self> {
        let n = direction[0].hypot(direction[1]);
        if !(n > 0.0) || !n.is_finite() || !base.iter().all(|b| b.is_finite()) {
            return Err(Error::invalid("data line needs a finite base and a nonzero direction"));
        }
        Ok(DataSurface { base, direction: [direction[0] / n, direction[1] / n], h })
    }

    pub fn base(&self) -> Point {
        self.base
    }

    pub fn direction(&self) -> Point {
        self.direction
    }

    pub fn data(&self) -> &DataFunction {
        &self.h
    }

    /// Distance along the left normal `(-d_y, d_x)`.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let [dx, dy] = self.direction;
        -dy * (p[0] - self.base[0]) + dx * (p[1] - self.base[1])
    }

    pub fn parameter(&self, p: Point) -> f64 {
        let [dx, dy] = self.direction;
        dx * (p[0] - self.base[0]) + dy * (p[1] - self.base[1])
    }

    fn normal(&self) -> Point {
        [-self.direction[1], self.direction[0]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackConfig {
    pub integrator: IntegratorConfig,
    /// Search budget in each time direction.
    pub t_max: f64,
    pub time_tol: f64,
}

impl Default for PullbackConfig {
    fn default() -> Self {
        PullbackConfig { integrator: IntegratorConfig::default(), t_max: 50.0, time_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PullbackResult {
    pub value: f64,
    /// Time of flight back to the data line; negative when the line is reached forward in time.
    pub r_star: f64,
    pub s_star: f64,
    /// False when the orbit meets the line (nearly) tangentially.
    pub transverse: bool,
}

/// First crossing of the line along the orbit in direction `dir` (+1 or -1).
/// A domain exit or overflow ends the search in that direction.
fn find_crossing(
    f: &VectorField2D,
    surf: &DataSurface,
    x: Point,
    dir: f64,
    cfg: &PullbackConfig,
) -> Result<Option<(f64, Point)>> {
    let nodes = time_nodes(dir * cfg.t_max, &cfg.integrator)?;
    let mut state = x;
    let mut dist = surf.signed_distance(x);
    for w in nodes.windows(2) {
        let dt = w[1] - w[0];
        let next = match rk4_step(f, state, dt) {
            Ok(p) => p,
            Err(Error::Domain { .. } | Error::NonFinite(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let d = surf.signed_distance(next);
        if d == 0.0 {
            return Ok(Some((w[1], next)));
        }
        if d.signum() != dist.signum() {
            let (mut lo, mut hi) = (0.0, dt.abs());
            while hi - lo > cfg.time_tol {
                let mid = 0.5 * (lo + hi);
                let dm = surf.signed_distance(rk4_step(f, state, dir * mid)?);
                if dm == 0.0 {
                    lo = mid;
                    hi = mid;
                } else if dm.signum() == dist.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = 0.5 * (lo + hi);
            return Ok(Some((w[0] + dir * tau, rk4_step(f, state, dir * tau)?)));
        }
        state = next;
        dist = d;
    }
    Ok(None)
}

/// Eigenfunction value `h(s*) e^(lambda r*)` obtained by flowing `x` back to the data line.
///
/// The backward orbit is searched first; if it never meets the line the forward
/// orbit is tried, giving a negative `r*`.
pub fn pullback_eigenfunction(
    f: &VectorField2D,
    surf: &DataSurface,
    lambda: f64,
    x: Point,
    cfg: &PullbackConfig,
) -> Result<PullbackResult> {
    f.check_domain(x)?;
    if !(cfg.t_max > 0.0) || !(cfg.time_tol > 0.0) {
        return Err(Error::invalid("pullback needs positive t_max and time tolerance"));
    }
    let crossing = if surf.signed_distance(x) == 0.0 {
        Some((0.0, x))
    } else {
        match find_crossing(f, surf, x, -1.0, cfg)? {
            Some(c) => Some(c),
            None => find_crossing(f, surf, x, 1.0, cfg)?,
        }
    };
    let (t_hit, p) = crossing.ok_or(Error::NoCrossing { t_max: cfg.t_max })?;
    let r_star = -t_hit;
    let s_star = surf.parameter(p);
    let v = f.eval(p)?;
    let speed = v[0].hypot(v[1]);
    let n = surf.normal();
    let transverse = speed > 0.0 && (n[0] * v[0] + n[1] * v[1]).abs() / speed > TRANSVERSE_TOL;
    let value = surf.h.eval(s_star) * (lambda * r_star).exp();
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("pullback value at ({}, {})", x[0], x[1])));
    }
    Ok(PullbackResult { value, r_star, s_star, transverse })
}

/// The pullback construction as an observable.
#[derive(Debug, Clone)]
pub struct PullbackEigenfunction {
    pub field: VectorField2D,
    pub surface: DataSurface,
    pub lambda: f64,
    pub config: PullbackConfig,
}

impl Observable for PullbackEigenfunction {
    fn value(&self, pt: Point) -> Result<f64> {
        Ok(pullback_eigenfunction(&self.field, &self.surface, self.lambda, pt, &self.config)?.value)
    }
}

/// Polynomial condition for `s2 = u_x` (or `s1 = v_y`) to be an eigenfunction of a shear-free field.
pub fn keig_condition_residual(f: &VectorField2D, which: RateKind, lambda: f64) -> Result<Poly2> {
    if !f.is_shear_free() {
        return Err(Error::invalid("field is not shear-free (u_y + v_x is not identically zero)"));
    }
    let (u, v) = f.components();
    let rate = match which {
        RateKind::S2 => u.differentiate(Var::X),
        RateKind::S1 => v.differentiate(Var::Y),
    };
    Ok(keig_residual(f, &KeigCandidate::new(rate, lambda)))
}
