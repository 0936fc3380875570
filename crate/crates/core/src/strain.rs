//! Eulerian rate-of-strain tensor, attraction/repulsion rates and grid sampling.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::vectorfield::{Mat2, VectorField2D};
use crate::Point;

/// Symmetric 2x2 tensor `[[sxx, sxy], [sxy, syy]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTensor2 {
    pub sxx: f64,
    pub sxy: f64,
    pub syy: f64,
}

impl SymTensor2 {
    /// Symmetric part `(A + A^T) / 2`.
    pub fn symmetric_part(a: &Mat2) -> Self {
        SymTensor2 { sxx: a.a11, sxy: 0.5 * (a.a12 + a.a21), syy: a.a22 }
    }

    /// `A^T A`.
    pub fn gram(a: &Mat2) -> Self {
        SymTensor2 {
            sxx: a.a11 * a.a11 + a.a21 * a.a21,
            sxy: a.a11 * a.a12 + a.a21 * a.a22,
            syy: a.a12 * a.a12 + a.a22 * a.a22,
        }
    }

    pub fn identity() -> Self {
        SymTensor2 { sxx: 1.0, sxy: 0.0, syy: 1.0 }
    }

    pub fn trace(&self) -> f64 {
        self.sxx + self.syy
    }

    /// Eigenvalues `(min, max)` from the closed-form quadratic.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.sxx + self.syy);
        let rad = 0.5 * (self.sxx - self.syy).hypot(2.0 * self.sxy);
        (mean - rad, mean + rad)
    }

    /// Unit eigenvector for the eigenvalue `mu`.
    pub fn eigenvector(&self, mu: f64) -> Point {
        // rows of (S - mu I) are orthogonal to the eigenvector; use the larger one
        let r1 = [self.sxx - mu, self.sxy];
        let r2 = [self.sxy, self.syy - mu];
        let n1 = r1[0].hypot(r1[1]);
        let n2 = r2[0].hypot(r2[1]);
        let (r, n) = if n1 >= n2 { (r1, n1) } else { (r2, n2) };
        if n == 0.0 {
            return [1.0, 0.0];
        }
        [-r[1] / n, r[0] / n]
    }
}

/// Which eigenvalue of the rate-of-strain tensor to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RateKind {
    /// Attraction rate (minimum eigenvalue).
    S1,
    /// Repulsion rate (maximum eigenvalue).
    S2,
}

impl FromStr for RateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s1" => Ok(RateKind::S1),
            "s2" => Ok(RateKind::S2),
            _ => Err(Error::invalid(format!("unknown rate `{s}` (expected s1 or s2)"))),
        }
    }
}

/// Attraction and repulsion rates `(s1, s2)` at `pt`.
pub fn strain_rates(f: &VectorField2D, pt: Point) -> Result<(f64, f64)> {
    let j = f.jacobian(pt)?;
    let mean = 0.5 * (j.a11 + j.a22);
    let rad = 0.5 * (j.a11 - j.a22).hypot(j.a12 + j.a21);
    Ok((mean - rad, mean + rad))
}

pub fn strain_tensor(f: &VectorField2D, pt: Point) -> Result<SymTensor2> {
    Ok(SymTensor2::symmetric_part(&f.jacobian(pt)?))
}

/// Uniform rectangular grid with `nx * ny` nodes including the end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid2D {
    pub xmin: f64,
    pub xmax: f64,
    pub nx: usize,
    pub ymin: f64,
    pub ymax: f64,
    pub ny: usize,
}

impl Grid2D {
    pub fn new(xmin: f64, xmax: f64, nx: usize, ymin: f64, ymax: f64, ny: usize) -> Result<Self> {
        let finite = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite());
        if !finite || !(xmin < xmax) || !(ymin < ymax) {
            return Err(Error::invalid("grid bounds must be finite with min < max"));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::invalid("grid needs at least 2 nodes per axis"));
        }
        Ok(Grid2D { xmin, xmax, nx, ymin, ymax, ny })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.xmax - self.xmin) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.ymax - self.ymin) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.nx - 1 {
            self.xmax
        } else {
            self.xmin + i as f64 * self.dx()
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j == self.ny - 1 {
            self.ymax
        } else {
            self.ymin + j as f64 * self.dy()
        }
    }

    /// Node at row-major index `k = j * nx + i`.
    pub fn node(&self, k: usize) -> Point {
        [self.x(k % self.nx), self.y(k / self.nx)]
    }

    pub fn nodes(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(|k| self.node(k))
    }
}

impl FromStr for Grid2D {
    type Err = Error;

    /// Parses `xmin:xmax:nx,ymin:ymax:ny`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("grid `{s}` is not of the form xmin:xmax:nx,ymin:ymax:ny"));
        let (xs, ys) = s.split_once(',').ok_or_else(bad)?;
        let axis = |a: &str| -> Result<(f64, f64, usize)> {
            let parts: Vec<&str> = a.split(':').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let lo = parts[0].parse().map_err(|_| bad())?;
            let hi = parts[1].parse().map_err(|_| bad())?;
            let n = parts[2].parse().map_err(|_| bad())?;
            Ok((lo, hi, n))
        };
        let (xmin, xmax, nx) = axis(xs)?;
        let (ymin, ymax, ny) = axis(ys)?;
        Grid2D::new(xmin, xmax, nx, ymin, ymax, ny)
    }
}

impl fmt::Display for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{},{}:{}:{}",
            self.xmin, self.xmax, self.nx, self.ymin, self.ymax, self.ny
        )
    }
}

/// Values sampled on a [`Grid2D`], row-major (x fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let [x, y] = grid.node(k);
            return Err(Error::NonFinite(format!("field value at ({x}, {y})")));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute difference from a reference function over the nodes.
    pub fn max_abs_deviation(&self, reference: impl Fn(Point) -> f64) -> f64 {
        self.grid
            .nodes()
            .zip(&self.values)
            .map(|(p, v)| (v - reference(p)).abs())
            .fold(0.0, f64::max)
    }
}

/// Evaluates `value` at every node in parallel; the result is independent of scheduling.
pub fn sample_grid<F>(grid: &Grid2D, value: F) -> Result<ScalarField>
where
    F: Fn(Point) -> Result<f64> + Sync,
{
    let results: Vec<Result<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|k| value(grid.node(k)))
        .collect();
    // report the first failing node in row-major order
    let values = results.into_iter().collect::<Result<Vec<f64>>>()?;
    ScalarField::new(*grid, values)
}

/// Samples `s1` or `s2` over a grid.
pub fn rate_field(f: &VectorField2D, grid: &Grid2D, which: RateKind) -> Result<ScalarField> {
    sample_grid(grid, |pt| {
        let (s1, s2) = strain_rates(f, pt)?;
        Ok(match which {
            RateKind::S1 => s1,
            RateKind::S2 => s2,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremalMode {
    Ridge,
    Trench,
}

impl FromStr for ExtremalMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ridge" => Ok(ExtremalMode::Ridge),
            "trench" => Ok(ExtremalMode::Trench),
            _ => Err(Error::invalid(format!("unknown mode `{s}` (expected ridge or trench)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremalPoint {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
}

/// Default gradient tolerance `1e-2 * range / spacing`.
pub fn default_grad_tol(field: &ScalarField) -> f64 {
    let spacing = field.grid().dx().min(field.grid().dy());
    1e-2 * (field.max() - field.min()) / spacing
}

pub const DEFAULT_CURV_TOL: f64 = 1e-6;

/// Grid nodes on a ridge or trench of `field`.
///
/// At each interior node the centered Hessian picks the transverse direction
/// `e` (largest-curvature eigenvector for trenches, most negative for ridges).
/// A node is accepted when the curvature along `e` exceeds `curv_tol` in the
/// right sign, the derivative along `e` is below `grad_tol`, and the
/// extremum along `e` predicted from these two lies within half a cell.
pub fn extract_extremal_set(
    field: &ScalarField,
    mode: ExtremalMode,
    grad_tol: f64,
    curv_tol: f64,
) -> Result<Vec<ExtremalPoint>> {
    let g = field.grid();
    if g.nx < 3 || g.ny < 3 {
        return Err(Error::invalid("ridge/trench extraction needs at least 3x3 nodes"));
    }
    let (hx, hy) = (g.dx(), g.dy());
    let f = |i: usize, j: usize| field.get(i, j);
    let mut out = Vec::new();
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let c = f(i, j);
            let grad = [
                (f(i + 1, j) - f(i - 1, j)) / (2.0 * hx),
                (f(i, j + 1) - f(i, j - 1)) / (2.0 * hy),
            ];
            let hess = SymTensor2 {
                sxx: (f(i + 1, j) - 2.0 * c + f(i - 1, j)) / (hx * hx),
                syy: (f(i, j + 1) - 2.0 * c + f(i, j - 1)) / (hy * hy),
                sxy: (f(i + 1, j + 1) - f(i + 1, j - 1) - f(i - 1, j + 1) + f(i - 1, j - 1))
                    / (4.0 * hx * hy),
            };
            let (lo, hi) = hess.eigenvalues();
            let curvature = match mode {
                ExtremalMode::Trench if hi > curv_tol => hi,
                ExtremalMode::Ridge if lo < -curv_tol => lo,
                _ => continue,
            };
            let e = hess.eigenvector(curvature);
            let slope = grad[0] * e[0] + grad[1] * e[1];
            if slope.abs() >= grad_tol {
                continue;
            }
            let step = -slope / curvature;
            if (step * e[0]).abs() <= 0.5 * hx && (step * e[1]).abs() <= 0.5 * hy {
                out.push(ExtremalPoint { i, j, x: g.x(i), y: g.y(j) });
            }
        }
    }
    Ok(out)
}
