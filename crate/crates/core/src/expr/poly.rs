use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::Point;

use super::parse::Var;

/// Coefficients with magnitude below this are dropped after every operation.
pub const CANONICAL_ZERO: f64 = 1e-12;

/// Largest total degree accepted when lowering expressions.
pub const MAX_DEGREE: u32 = 64;

/// One monomial `c * x^i * y^j`; the JSON form of a polynomial is a list of these.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub i: u32,
    pub j: u32,
    pub c: f64,
}

/// Sparse polynomial in `x`, `y` keyed by exponent pair `(i, j)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Term>", into = "Vec<Term>")]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), f64>,
}

impl From<Vec<Term>> for Poly2 {
    fn from(terms: Vec<Term>) -> Self {
        Poly2::from_terms(terms.into_iter().map(|t| ((t.i, t.j), t.c)))
    }
}

impl From<Poly2> for Vec<Term> {
    fn from(p: Poly2) -> Self {
        p.terms().map(|((i, j), c)| Term { i, j, c }).collect()
    }
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2::default()
    }

    pub fn constant(c: f64) -> Self {
        Poly2::monomial(0, 0, c)
    }

    pub fn x() -> Self {
        Poly2::monomial(1, 0, 1.0)
    }

    pub fn y() -> Self {
        Poly2::monomial(0, 1, 1.0)
    }

    pub fn monomial(i: u32, j: u32, c: f64) -> Self {
        Poly2::from_terms([((i, j), c)])
    }

    /// Builds a polynomial from `((i, j), c)` pairs; repeated exponents are summed.
    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), f64)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in terms {
            *map.entry(k).or_insert(0.0) += c;
        }
        let mut p = Poly2 { terms: map };
        p.canonicalize();
        p
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|_, c| c.abs() >= CANONICAL_ZERO);
    }

    /// Terms in ascending `(i, j)` order.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, *c))
    }

    pub fn coeff(&self, i: u32, j: u32) -> f64 {
        self.terms.get(&(i, j)).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// True when no term depends on `y`.
    pub fn is_univariate_x(&self) -> bool {
        self.terms.keys().all(|&(_, j)| j == 0)
    }

    pub fn eval(&self, pt: Point) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), &c)| c * pt[0].powi(i as i32) * pt[1].powi(j as i32))
            .sum()
    }

    /// Sum of absolute term values at `pt`; a scale for rounding-error bounds.
    pub fn eval_abs(&self, pt: Point) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), &c)| (c * pt[0].powi(i as i32) * pt[1].powi(j as i32)).abs())
            .sum()
    }

    pub fn eval_scalar<S: Scalar>(&self, x: S, y: S) -> S {
        self.terms.iter().fold(S::from_f64(0.0), |acc, (&(i, j), &c)| {
            acc + S::from_f64(c) * x.powi(i as i32) * y.powi(j as i32)
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Poly2::from_terms(self.terms().map(|(k, c)| (k, c * s)))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Poly2::constant(1.0);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn differentiate(&self, var: Var) -> Self {
        Poly2::from_terms(self.terms().filter_map(|((i, j), c)| match var {
            Var::X if i > 0 => Some(((i - 1, j), c * i as f64)),
            Var::Y if j > 0 => Some(((i, j - 1), c * j as f64)),
            _ => None,
        }))
    }

    /// Substitutes `x -> px`, `y -> py`.
    pub fn compose(&self, px: &Poly2, py: &Poly2) -> Self {
        let max_i = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let max_j = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        let powers = |p: &Poly2, n: u32| {
            let mut v = vec![Poly2::constant(1.0)];
            for k in 1..=n as usize {
                let next = &v[k - 1] * p;
                v.push(next);
            }
            v
        };
        let (xs, ys) = (powers(px, max_i), powers(py, max_j));
        let mut out = Poly2::zero();
        for (&(i, j), &c) in &self.terms {
            let t = (&xs[i as usize] * &ys[j as usize]).scale(c);
            out = out + t;
        }
        out
    }

    /// Returns `p(M z + b)` expanded in the new variables `z`.
    pub fn affine_substitute(&self, m: [[f64; 2]; 2], b: Point) -> Self {
        let px = Poly2::from_terms([((1, 0), m[0][0]), ((0, 1), m[0][1]), ((0, 0), b[0])]);
        let py = Poly2::from_terms([((1, 0), m[1][0]), ((0, 1), m[1][1]), ((0, 0), b[1])]);
        self.compose(&px, &py)
    }

    /// Largest absolute coefficient difference; both polynomials are canonical.
    pub fn max_coeff_diff(&self, other: &Poly2) -> f64 {
        (self - other).max_abs_coeff()
    }
}

impl Add for Poly2 {
    type Output = Poly2;
    fn add(self, rhs: Poly2) -> Poly2 {
        &self + &rhs
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        Poly2::from_terms(self.terms().chain(rhs.terms()))
    }
}

impl Sub for Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: Poly2) -> Poly2 {
        &self - &rhs
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        Poly2::from_terms(self.terms().chain(rhs.terms().map(|(k, c)| (k, -c))))
    }
}

impl Neg for Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut map: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for (&(i1, j1), &c1) in &self.terms {
            for (&(i2, j2), &c2) in &rhs.terms {
                *map.entry((i1 + i2, j1 + j2)).or_insert(0.0) += c1 * c2;
            }
        }
        let mut p = Poly2 { terms: map };
        p.canonicalize();
        p
    }
}

impl Mul for Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: Poly2) -> Poly2 {
        &self * &rhs
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (&(i, j), &c)) in self.terms.iter().enumerate() {
            let sign = if c < 0.0 { '-' } else { '+' };
            if n == 0 {
                if c < 0.0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            write!(f, "{:?}", c.abs())?;
            for (var, e) in [("x", i), ("y", j)] {
                match e {
                    0 => {}
                    1 => write!(f, "*{var}")?,
                    _ => write!(f, "*{var}^{e}")?,
                }
            }
        }
        Ok(())
    }
}
