//! Saddle eigenfunction series built by greedy Taylor cancellation.
//!
//! Expansions are truncated power series in `t = y^2`. Basis term `k` must start at
//! order `t^k`; each step removes the lowest remaining order of the target.

use serde::Serialize;

use crate::dual::{Dual2, Scalar};
use crate::error::{Error, Result};
use crate::koopman::Observable;
use crate::vectorfield::VectorField2D;
use crate::Point;

/// Default number of retained orders in `y^2`.
pub const DEFAULT_TAYLOR_LEN: usize = 24;

/// Coefficients of `1, t, t^2, ...` with `t = y^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorSeq {
    coeffs: Vec<f64>,
}

impl TaylorSeq {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        TaylorSeq { coeffs }
    }

    pub fn zero() -> Self {
        TaylorSeq { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    /// Index of the first nonzero coefficient.
    pub fn leading_order(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0.0)
    }

    /// `scale * t^shift * (1 - t)^(-a)` truncated to `len` orders.
    pub fn shifted_binomial(scale: f64, shift: usize, a: f64, len: usize) -> Self {
        let mut coeffs = vec![0.0; len];
        let mut b = scale;
        for (i, slot) in coeffs.iter_mut().enumerate().skip(shift) {
            *slot = b;
            let n = (i - shift + 1) as f64;
            b *= (a + n - 1.0) / n;
        }
        TaylorSeq::new(coeffs)
    }

    fn axpy(&mut self, s: f64, other: &TaylorSeq) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), 0.0);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= s * b;
        }
    }
}

/// `w^k = 3^k t^k (1 - t)^(-k)` with `w = 3y^2/(1-y^2)`.
pub fn w_power_seq(k: usize, len: usize) -> TaylorSeq {
    TaylorSeq::shifted_binomial(3f64.powi(k as i32), k, k as f64, len)
}

fn greedy(target: &TaylorSeq, basis: impl Fn(usize) -> TaylorSeq, orders: std::ops::Range<usize>) -> Result<Vec<f64>> {
    let mut rest = target.clone();
    let mut out = Vec::with_capacity(orders.len());
    for k in orders {
        let b = basis(k);
        if b.leading_order() != Some(k) {
            return Err(Error::invalid(format!("basis term {k} does not start at order y^{}", 2 * k)));
        }
        let c = rest.get(k) / b.get(k);
        rest.axpy(c, &b);
        out.push(c);
    }
    Ok(out)
}

/// Coefficients `c_1..c_N` with `sum c_k basis(k)` matching `target` through `y^(2N)`.
pub fn greedy_series_coefficients(
    target: &TaylorSeq,
    basis: impl Fn(usize) -> TaylorSeq,
    n: usize,
) -> Result<Vec<f64>> {
    if target.get(0) != 0.0 {
        return Err(Error::invalid("target has a constant term the basis cannot represent"));
    }
    greedy(target, basis, 1..n + 1)
}

/// Coefficients of `3y^2 = sum_k c_k w^k` through order `N`.
pub fn attraction_series_coefficients(n: usize) -> Vec<f64> {
    let len = DEFAULT_TAYLOR_LEN.max(n + 1);
    let target = TaylorSeq::new(vec![0.0, 3.0]);
    greedy_series_coefficients(&target, |k| w_power_seq(k, len), n).expect("w^k starts at order k")
}

/// One term `c_k w^k` of the attraction-rate series; an eigenfunction with eigenvalue `-2k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    pub k: u32,
    pub coefficient: f64,
}

impl SeriesTerm {
    pub fn attraction_rate(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("series terms start at k = 1"));
        }
        let c = attraction_series_coefficients(k as usize)[k as usize - 1];
        Ok(SeriesTerm { k, coefficient: c })
    }

    pub fn eigenvalue(&self) -> f64 {
        -2.0 * self.k as f64
    }

    fn eval<S: Scalar>(&self, y: S) -> S {
        let w = S::from_f64(3.0) * y * y / (S::from_f64(1.0) - y * y);
        S::from_f64(self.coefficient) * w.powi(self.k as i32)
    }
}

impl Observable for SeriesTerm {
    fn value(&self, pt: Point) -> Result<f64> {
        VectorField2D::Saddle.check_domain(pt)?;
        Ok(self.eval(pt[1]))
    }

    fn gradient(&self, pt: Point) -> Result<Point> {
        VectorField2D::Saddle.check_domain(pt)?;
        let (_, y) = Dual2::variables(pt);
        Ok(self.eval(y).d)
    }
}

/// `c_k (3y^2/(1-y^2))^k`.
pub fn phi_minus_2k(k: u32, pt: Point) -> Result<f64> {
    SeriesTerm::attraction_rate(k)?.value(pt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialSum {
    #[serde(rename = "N")]
    pub n: usize,
    pub y: f64,
    pub value: f64,
    pub error: f64,
    /// `3 u^(N+1)/(1-u)` with `u = y^2/(1-y^2)`.
    pub tail_bound: f64,
}

/// `sum_{k<=N} c_k w^k` at `y` compared with `3y^2`.
pub fn partial_sum_check(n: usize, y: f64) -> Result<PartialSum> {
    if !(y.abs() < std::f64::consts::FRAC_1_SQRT_2) {
        return Err(Error::Domain { what: "the attraction-rate series (|y| < 1/sqrt 2)", x: 0.0, y });
    }
    let coeffs = attraction_series_coefficients(n);
    let w = 3.0 * y * y / (1.0 - y * y);
    let value: f64 = coeffs.iter().zip(1..).map(|(c, k)| c * w.powi(k)).sum();
    let u = w / 3.0;
    Ok(PartialSum {
        n,
        y,
        value,
        error: (value - 3.0 * y * y).abs(),
        tail_bound: 3.0 * u.powi(n as i32 + 1) / (1.0 - u),
    })
}

/// `x^n q^(n-lambda)` with the signed root `q = y sqrt(3/(1-y^2))`; for non-integer
/// `n - lambda` the power is taken of `|q|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiNLambda {
    pub n: u32,
    pub lambda: f64,
}

impl PhiNLambda {
    fn exponent(&self) -> f64 {
        self.n as f64 - self.lambda
    }

    fn check(&self, pt: Point) -> Result<()> {
        VectorField2D::Saddle.check_domain(pt)?;
        if pt[1] == 0.0 && self.exponent() < 0.0 {
            return Err(Error::Domain { what: "phi_{n,lambda} with n < lambda (y != 0)", x: pt[0], y: pt[1] });
        }
        Ok(())
    }

    fn eval<S: Scalar>(&self, x: S, y: S) -> S {
        let one = S::from_f64(1.0);
        let m = self.exponent();
        let xn = x.powi(self.n as i32);
        if m.fract() == 0.0 {
            let q = y * (S::from_f64(3.0) / (one - y * y)).sqrt();
            xn * q.powi(m as i32)
        } else {
            let w = S::from_f64(3.0) * y * y / (one - y * y);
            xn * w.powf(0.5 * m)
        }
    }
}

impl Observable for PhiNLambda {
    fn value(&self, pt: Point) -> Result<f64> {
        self.check(pt)?;
        Ok(self.eval(pt[0], pt[1]))
    }

    fn gradient(&self, pt: Point) -> Result<Point> {
        self.check(pt)?;
        let (x, y) = Dual2::variables(pt);
        Ok(self.eval(x, y).d)
    }
}

pub fn phi_n_lambda(n: u32, lambda: f64, pt: Point) -> Result<f64> {
    PhiNLambda { n, lambda }.value(pt)
}

/// `x^n y^m ~ sum_j c_j phi_{n, lambda_j}` with `lambda_j = n - m - 2j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub n: u32,
    pub m: u32,
    pub lambdas: Vec<f64>,
    pub coefficients: Vec<f64>,
}

impl Decomposition {
    /// Partial sum over the first `terms` basis functions.
    pub fn partial_sum(&self, pt: Point, terms: usize) -> Result<f64> {
        self.lambdas
            .iter()
            .zip(&self.coefficients)
            .take(terms)
            .try_fold(0.0, |acc, (&l, &c)| Ok(acc + c * phi_n_lambda(self.n, l, pt)?))
    }
}

/// Greedy expansion of `x^n y^m` in saddle eigenfunctions sharing the power `x^n`.
pub fn decompose_monomial(n: u32, m: u32, terms: usize) -> Result<Decomposition> {
    if terms == 0 {
        return Err(Error::invalid("decomposition needs at least one term"));
    }
    let len = DEFAULT_TAYLOR_LEN.max(terms + 1);
    // q^(m+2j) / y^m = 3^((m+2j)/2) t^j (1-t)^(-(m+2j)/2)
    let basis = |j: usize| {
        let p = m as f64 + 2.0 * j as f64;
        TaylorSeq::shifted_binomial(3f64.powf(0.5 * p), j, 0.5 * p, len)
    };
    let coefficients = greedy(&TaylorSeq::new(vec![1.0]), basis, 0..terms)?;
    let lambdas = (0..terms).map(|j| n as f64 - m as f64 - 2.0 * j as f64).collect();
    Ok(Decomposition { n, m, lambdas, coefficients })
}
