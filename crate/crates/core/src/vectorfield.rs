//! Planar autonomous vector fields `x' = v(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Poly2, Var};
use crate::Point;

/// Guard band for the saddle domain `|y| < 1`.
pub const SADDLE_DOMAIN_MARGIN: f64 = 1e-12;

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a11: 1.0, a12: 0.0, a21: 0.0, a22: 1.0 };

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    /// Builds a matrix from its two columns.
    pub fn from_columns(c1: Point, c2: Point) -> Self {
        Mat2 { a11: c1[0], a12: c2[0], a21: c1[1], a22: c2[1] }
    }

    pub fn transpose(&self) -> Self {
        Mat2 { a11: self.a11, a12: self.a21, a21: self.a12, a22: self.a22 }
    }

    pub fn mul(&self, o: &Mat2) -> Self {
        Mat2 {
            a11: self.a11 * o.a11 + self.a12 * o.a21,
            a12: self.a11 * o.a12 + self.a12 * o.a22,
            a21: self.a21 * o.a11 + self.a22 * o.a21,
            a22: self.a21 * o.a12 + self.a22 * o.a22,
        }
    }

    pub fn apply(&self, v: Point) -> Point {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Mat2 {
            a11: self.a22 / d,
            a12: -self.a12 / d,
            a21: -self.a21 / d,
            a22: self.a11 / d,
        })
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    pub fn is_finite(&self) -> bool {
        [self.a11, self.a12, self.a21, self.a22].iter().all(|v| v.is_finite())
    }
}

/// Polynomial components with their first partial derivatives cached.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyField {
    p: Poly2,
    q: Poly2,
    p_x: Poly2,
    p_y: Poly2,
    q_x: Poly2,
    q_y: Poly2,
}

impl PolyField {
    fn new(p: Poly2, q: Poly2) -> Self {
        PolyField {
            p_x: p.differentiate(Var::X),
            p_y: p.differentiate(Var::Y),
            q_x: q.differentiate(Var::X),
            q_y: q.differentiate(Var::Y),
            p,
            q,
        }
    }
}

/// A planar autonomous vector field.
///
/// The saddle `x' = x, y' = -y + y^3` is kept as its own variant: it is only
/// defined on `|y| < 1` and carries a closed-form flow used as an oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "FieldJson", into = "FieldJson")]
pub enum VectorField2D {
    Polynomial(PolyField),
    Saddle,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum FieldJson {
    Polynomial { p: Poly2, q: Poly2 },
    Saddle,
}

impl From<FieldJson> for VectorField2D {
    fn from(f: FieldJson) -> Self {
        match f {
            FieldJson::Polynomial { p, q } => VectorField2D::polynomial(p, q),
            FieldJson::Saddle => VectorField2D::Saddle,
        }
    }
}

impl From<VectorField2D> for FieldJson {
    fn from(f: VectorField2D) -> Self {
        match f {
            VectorField2D::Polynomial(pf) => FieldJson::Polynomial { p: pf.p, q: pf.q },
            VectorField2D::Saddle => FieldJson::Saddle,
        }
    }
}

impl VectorField2D {
    pub fn polynomial(p: Poly2, q: Poly2) -> Self {
        VectorField2D::Polynomial(PolyField::new(p, q))
    }

    pub fn saddle() -> Self {
        VectorField2D::Saddle
    }

    fn saddle_components() -> (Poly2, Poly2) {
        (Poly2::x(), Poly2::from_terms([((0, 1), -1.0), ((0, 3), 1.0)]))
    }

    /// The polynomial components `(u, v)`; for the saddle, its polynomial form.
    pub fn components(&self) -> (Poly2, Poly2) {
        match self {
            VectorField2D::Polynomial(pf) => (pf.p.clone(), pf.q.clone()),
            VectorField2D::Saddle => Self::saddle_components(),
        }
    }

    pub fn is_saddle(&self) -> bool {
        matches!(self, VectorField2D::Saddle)
    }

    pub fn in_domain(&self, pt: Point) -> bool {
        match self {
            VectorField2D::Polynomial(_) => pt[0].is_finite() && pt[1].is_finite(),
            VectorField2D::Saddle => {
                pt[0].is_finite() && pt[1].abs() < 1.0 - SADDLE_DOMAIN_MARGIN
            }
        }
    }

    pub fn check_domain(&self, pt: Point) -> Result<()> {
        if self.in_domain(pt) {
            Ok(())
        } else {
            Err(Error::Domain {
                what: match self {
                    VectorField2D::Polynomial(_) => "a polynomial field (non-finite point)",
                    VectorField2D::Saddle => "the saddle (|y| < 1)",
                },
                x: pt[0],
                y: pt[1],
            })
        }
    }

    /// `(u(x, y), v(x, y))`.
    pub fn eval(&self, pt: Point) -> Result<Point> {
        self.check_domain(pt)?;
        Ok(self.eval_unchecked(pt))
    }

    pub(crate) fn eval_unchecked(&self, pt: Point) -> Point {
        match self {
            VectorField2D::Polynomial(pf) => [pf.p.eval(pt), pf.q.eval(pt)],
            VectorField2D::Saddle => {
                let y = pt[1];
                [pt[0], -y + y * y * y]
            }
        }
    }

    /// Analytic velocity gradient `[[u_x, u_y], [v_x, v_y]]`.
    pub fn jacobian(&self, pt: Point) -> Result<Mat2> {
        self.check_domain(pt)?;
        Ok(match self {
            VectorField2D::Polynomial(pf) => Mat2::new(
                pf.p_x.eval(pt),
                pf.p_y.eval(pt),
                pf.q_x.eval(pt),
                pf.q_y.eval(pt),
            ),
            VectorField2D::Saddle => Mat2::new(1.0, 0.0, 0.0, -1.0 + 3.0 * pt[1] * pt[1]),
        })
    }

    /// `u_y + v_x`; the zero polynomial exactly when the field is shear-free.
    pub fn shear_free_defect(&self) -> Poly2 {
        let (u, v) = self.components();
        u.differentiate(Var::Y) + v.differentiate(Var::X)
    }

    pub fn is_shear_free(&self) -> bool {
        self.shear_free_defect().is_zero()
    }

    /// Divergence `u_x + v_y` as a polynomial.
    pub fn divergence(&self) -> Poly2 {
        let (u, v) = self.components();
        u.differentiate(Var::X) + v.differentiate(Var::Y)
    }

    /// The field in coordinates `z = M x`, i.e. `z' = M v(M^{-1} z)`.
    pub fn linear_change(&self, m: Mat2) -> Result<VectorField2D> {
        let inv = m
            .inverse()
            .ok_or_else(|| Error::invalid("coordinate change matrix is singular"))?;
        let (u, v) = self.components();
        let (u, v) = (
            u.affine_substitute(inv.rows(), [0.0, 0.0]),
            v.affine_substitute(inv.rows(), [0.0, 0.0]),
        );
        let p = &u.scale(m.a11) + &v.scale(m.a12);
        let q = &u.scale(m.a21) + &v.scale(m.a22);
        Ok(VectorField2D::polynomial(p, q))
    }

    /// The field in coordinates `z = x - offset`.
    pub fn translate(&self, offset: Point) -> VectorField2D {
        let (u, v) = self.components();
        let id = Mat2::IDENTITY.rows();
        VectorField2D::polynomial(u.affine_substitute(id, offset), v.affine_substitute(id, offset))
    }
}

/// Closed-form flow of the saddle `x' = x, y' = -y + y^3`.
pub fn analytic_saddle_flow(pt: Point, t: f64) -> Result<Point> {
    VectorField2D::Saddle.check_domain(pt)?;
    let [x, y] = pt;
    let denom = ((1.0 - y * y) * (2.0 * t).exp() + y * y).sqrt();
    Ok([x * t.exp(), y / denom])
}
