//! Forward-mode automatic differentiation in two variables.
//!
//! Closed-form observables are written once, generically over [`Scalar`], and
//! evaluated either on plain `f64` or on [`Dual2`] to obtain an exact gradient
//! without finite-difference noise.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn value(self) -> f64;
    fn sqrt(self) -> Self;
    fn powf(self, e: f64) -> Self;
    fn exp(self) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// A value together with its partial derivatives with respect to `x` and `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub d: [f64; 2],
}

impl Dual2 {
    pub fn constant(v: f64) -> Self {
        Dual2 { v, d: [0.0, 0.0] }
    }

    /// Seeds the two coordinates of `pt` as independent variables.
    pub fn variables(pt: [f64; 2]) -> (Self, Self) {
        (
            Dual2 { v: pt[0], d: [1.0, 0.0] },
            Dual2 { v: pt[1], d: [0.0, 1.0] },
        )
    }

    fn chain(self, v: f64, dv: f64) -> Self {
        Dual2 { v, d: [dv * self.d[0], dv * self.d[1]] }
    }
}

impl Add for Dual2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual2 { v: self.v + o.v, d: [self.d[0] + o.d[0], self.d[1] + o.d[1]] }
    }
}

impl Sub for Dual2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual2 { v: self.v - o.v, d: [self.d[0] - o.d[0], self.d[1] - o.d[1]] }
    }
}

impl Mul for Dual2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual2 {
            v: self.v * o.v,
            d: [self.d[0] * o.v + self.v * o.d[0], self.d[1] * o.v + self.v * o.d[1]],
        }
    }
}

impl Div for Dual2 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.v;
        let v = self.v * inv;
        Dual2 {
            v,
            d: [(self.d[0] - v * o.d[0]) * inv, (self.d[1] - v * o.d[1]) * inv],
        }
    }
}

impl Neg for Dual2 {
    type Output = Self;
    fn neg(self) -> Self {
        Dual2 { v: -self.v, d: [-self.d[0], -self.d[1]] }
    }
}

impl Scalar for Dual2 {
    fn from_f64(v: f64) -> Self {
        Dual2::constant(v)
    }
    fn value(self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r)
    }
    fn powf(self, e: f64) -> Self {
        let p = self.v.powf(e);
        self.chain(p, e * self.v.powf(e - 1.0))
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn powi(self, n: i32) -> Self {
        let p = self.v.powi(n);
        let dp = if n == 0 { 0.0 } else { n as f64 * self.v.powi(n - 1) };
        self.chain(p, dp)
    }
}
