//! Polynomial vector-field families whose strain rates are Koopman eigenfunctions,
//! the 1-D no-go residual and the Carleman lift of the transformed cubic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Poly2, Var};
use crate::koopman::{best_lambda, keig_residual, KeigCandidate};
use crate::vectorfield::{Mat2, VectorField2D};
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticParams {
    pub lambda: f64,
    pub a20: f64,
}

/// `P = -lambda y + a20 (x+y)^2`, `Q = lambda x + 2 lambda y - a20 (x+y)^2`.
pub fn make_quadratic_family(p: QuadraticParams) -> VectorField2D {
    let sq = Poly2::from_terms([((1, 0), 1.0), ((0, 1), 1.0)]).pow(2).scale(p.a20);
    let u = &Poly2::monomial(0, 1, -p.lambda) + &sq;
    let v = &Poly2::from_terms([((1, 0), p.lambda), ((0, 1), 2.0 * p.lambda)]) - &sq;
    assert!(quadratic_pattern_holds(&u, &v), "quadratic family left its coefficient pattern");
    VectorField2D::polynomial(u, v)
}

/// Support and sign pattern of the quadratic family: no constants, no `x` in `P`,
/// and opposite quadratic parts.
fn quadratic_pattern_holds(u: &Poly2, v: &Poly2) -> bool {
    let allowed_u = [(0, 1), (2, 0), (1, 1), (0, 2)];
    let allowed_v = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
    u.terms().all(|(e, _)| allowed_u.contains(&e))
        && v.terms().all(|(e, _)| allowed_v.contains(&e))
        && [(2, 0), (1, 1), (0, 2)].iter().all(|&(i, j)| close(u.coeff(i, j), -v.coeff(i, j)))
        && close(v.coeff(0, 1), 2.0 * v.coeff(1, 0))
        && close(u.coeff(0, 1), -v.coeff(1, 0))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 4e-12
}

/// The repulsion rate `s2 = u_x = 2 a20 (x+y)` of the quadratic family.
pub fn quadratic_s2(p: QuadraticParams) -> Poly2 {
    Poly2::from_terms([((1, 0), 2.0 * p.a20), ((0, 1), 2.0 * p.a20)])
}

/// Cubic family in either of its two parameterizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CubicParams {
    Coefficients { a10: f64, k: f64, a20: f64, b00: f64 },
    Eigen { lambda: f64, c: f64, k: f64, a00: f64 },
}

/// `(lambda, c, k, a00)` of the eigen-parameterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicEigenParams {
    pub lambda: f64,
    pub c: f64,
    pub k: f64,
    pub a00: f64,
}

impl CubicParams {
    pub fn k(&self) -> f64 {
        match *self {
            CubicParams::Coefficients { k, .. } | CubicParams::Eigen { k, .. } => k,
        }
    }

    fn check(&self) -> Result<()> {
        if self.k() == 0.0 || !self.k().is_finite() {
            return Err(Error::invalid("cubic family requires k != 0"));
        }
        Ok(())
    }

    pub fn to_eigen(&self) -> Result<CubicEigenParams> {
        self.check()?;
        Ok(match *self {
            CubicParams::Eigen { lambda, c, k, a00 } => CubicEigenParams { lambda, c, k, a00 },
            CubicParams::Coefficients { a10, k, a20, b00 } => {
                let lambda = a10 - a20 / (3.0 * k);
                CubicEigenParams { lambda, c: -2.0 * k * a20, k, a00: lambda / (6.0 * k) - b00 }
            }
        })
    }
}

fn sum_power(n: u32) -> Poly2 {
    Poly2::from_terms([((1, 0), 1.0), ((0, 1), 1.0)]).pow(n)
}

/// The cubic family; `s1 = Q_y` is an eigenfunction with eigenvalue `lambda`.
pub fn make_cubic_family(p: CubicParams) -> Result<VectorField2D> {
    p.check()?;
    let (r2, r3) = (sum_power(2), sum_power(3));
    let (u, v) = match p {
        CubicParams::Coefficients { a10, k, a20, b00 } => {
            let a00 = (a10 - a20 / (3.0 * k)) / (6.0 * k) - b00;
            let a11 = 0.5 * (a10 + a20 / (3.0 * k));
            let b11 = -a20 / (3.0 * k);
            let cubic = &r2.scale(a20) + &r3.scale(a20 * k);
            let u = &Poly2::from_terms([((0, 0), a00), ((1, 0), a10), ((0, 1), a11)]) + &cubic;
            let v = &Poly2::from_terms([((0, 0), b00), ((1, 0), -a11), ((0, 1), b11)]) - &cubic;
            (u, v)
        }
        CubicParams::Eigen { lambda, c, k, a00 } => {
            let g = c / (6.0 * k * k);
            let cubic = &r2.scale(0.5 * c / k) + &r3.scale(0.5 * c);
            let u = &Poly2::from_terms([((0, 0), a00), ((1, 0), lambda - g), ((0, 1), 0.5 * lambda - g)])
                - &cubic;
            let v = &Poly2::from_terms([
                ((0, 0), lambda / (6.0 * k) - a00),
                ((1, 0), -(0.5 * lambda - g)),
                ((0, 1), g),
            ]) + &cubic;
            (u, v)
        }
    };
    Ok(VectorField2D::polynomial(u, v))
}

/// `s1 = Q_y` of the cubic family as a polynomial in `x, y`.
pub fn cubic_s1(p: CubicParams) -> Result<Poly2> {
    let (_, v) = make_cubic_family(p)?.components();
    Ok(v.differentiate(Var::Y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicEquilibrium {
    pub r_bar: f64,
    pub s_bar: f64,
    pub r_t: f64,
}

/// Equilibrium of the `(r, s) = (x+y, y-x)` form and the closed-form `r(t)` from `r(0) = r0`.
pub fn equilibrium_and_r_solution(p: CubicParams, r0: f64, t: f64) -> Result<CubicEquilibrium> {
    let CubicEigenParams { lambda, c, k, a00 } = p.to_eigen()?;
    if lambda == 0.0 {
        return Err(Error::invalid("equilibrium s-coordinate is undefined for lambda = 0"));
    }
    let r_bar = -1.0 / (3.0 * k);
    let s_bar = -(2.0 / lambda) * (lambda / (2.0 * k) - c / (27.0 * k * k * k) - 2.0 * a00);
    let (a, abar) = (0.5 * lambda, lambda / (6.0 * k));
    let r_t = ((abar + a * r0) * (a * t).exp() - abar) / a;
    Ok(CubicEquilibrium { r_bar, s_bar, r_t })
}

/// Rotation `T` and translation taking the cubic family to the transformed form,
/// `z = T x - (r_bar, s_bar)`.
pub fn transformed_coordinates(p: CubicParams) -> Result<(Mat2, Point)> {
    let eq = equilibrium_and_r_solution(p, 0.0, 0.0)?;
    Ok((Mat2::new(1.0, 1.0, -1.0, 1.0), [eq.r_bar, eq.s_bar]))
}

/// `x1' = (lambda/2) x1`, `x2' = -lambda x1 + (lambda/2) x2 + sum_n c_n x1^n` (n from 3).
pub fn make_transformed_family(lambda: f64, coeffs: &[f64]) -> Result<VectorField2D> {
    if coeffs.is_empty() {
        return Err(Error::invalid("transformed family needs at least the cubic coefficient"));
    }
    let u = Poly2::monomial(1, 0, 0.5 * lambda);
    let mut v = Poly2::from_terms([((1, 0), -lambda), ((0, 1), 0.5 * lambda)]);
    for (n, &c) in (3u32..).zip(coeffs) {
        v = &v + &Poly2::monomial(n, 0, c);
    }
    Ok(VectorField2D::polynomial(u, v))
}

/// The attraction rate claimed for the transformed family,
/// `-(1/2) sum_n n c_n x1^(n-1)`.
pub fn transformed_s1_claim(coeffs: &[f64]) -> Poly2 {
    (3u32..)
        .zip(coeffs)
        .fold(Poly2::zero(), |acc, (n, &c)| &acc + &Poly2::monomial(n - 1, 0, -0.5 * n as f64 * c))
}

/// Outcome of testing the claimed attraction rate of a transformed family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtendedFamilyReport {
    pub lambda: f64,
    /// The claim checked against `lambda` as an exact polynomial identity.
    pub exact_at_lambda: bool,
    pub residual_max_coeff: f64,
    pub best_lambda: f64,
    pub best_resnorm: f64,
}

/// Diagnostic for the claim that `transformed_s1_claim` is an eigenfunction with eigenvalue `lambda`.
pub fn extended_family_report(lambda: f64, coeffs: &[f64], samples: &[Point]) -> Result<ExtendedFamilyReport> {
    let f = make_transformed_family(lambda, coeffs)?;
    let g = transformed_s1_claim(coeffs);
    let r = keig_residual(&f, &KeigCandidate::new(g.clone(), lambda));
    let (best, resnorm) = best_lambda(&f, &g, samples)?;
    Ok(ExtendedFamilyReport {
        lambda,
        exact_at_lambda: r.is_zero(),
        residual_max_coeff: r.max_abs_coeff(),
        best_lambda: best,
        best_resnorm: resnorm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OneDReport {
    pub lambda: f64,
    pub resnorm: f64,
    pub lambda_star: f64,
    pub resnorm_star: f64,
    /// The residual vanishes at the optimum.
    pub trivial: bool,
}

/// RMS of `f'' f - lambda f'` over `samples`, and the least-squares optimal `lambda`.
pub fn one_d_residual(f: &Poly2, lambda: f64, samples: &[f64]) -> Result<OneDReport> {
    if !f.is_univariate_x() {
        return Err(Error::invalid(format!("expected a polynomial in x alone, got {f}")));
    }
    if samples.len() < 2 {
        return Err(Error::invalid("one_d_residual needs at least two samples"));
    }
    let d1 = f.differentiate(Var::X);
    let d2 = d1.differentiate(Var::X);
    let pairs: Vec<(f64, f64)> = samples
        .iter()
        .map(|&x| (d2.eval([x, 0.0]) * f.eval([x, 0.0]), d1.eval([x, 0.0])))
        .collect();
    let rms = |l: f64| {
        (pairs.iter().map(|(a, b)| (a - l * b).powi(2)).sum::<f64>() / pairs.len() as f64).sqrt()
    };
    let bb: f64 = pairs.iter().map(|(_, b)| b * b).sum();
    let lambda_star = if bb == 0.0 { 0.0 } else { pairs.iter().map(|(a, b)| a * b).sum::<f64>() / bb };
    let resnorm_star = rms(lambda_star);
    Ok(OneDReport {
        lambda,
        resnorm: rms(lambda),
        lambda_star,
        resnorm_star,
        trivial: resnorm_star < 1e-12,
    })
}

/// `expm1(z)/z`, continuous at zero.
fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        1.0 + z / 2.0 + z * z / 6.0
    } else {
        z.exp_m1() / z
    }
}

pub type Mat3 = [[f64; 3]; 3];

fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// Linear lift `y = (x1, x2, x1^3)` of the transformed cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlemanModel {
    pub lambda: f64,
    pub c: f64,
}

impl CarlemanModel {
    pub fn new(lambda: f64, c: f64) -> Self {
        CarlemanModel { lambda, c }
    }

    pub fn matrix(&self) -> Mat3 {
        let l = self.lambda;
        [[0.5 * l, 0.0, 0.0], [-l, 0.5 * l, self.c], [0.0, 0.0, 1.5 * l]]
    }

    pub fn lift(x0: Point) -> [f64; 3] {
        [x0[0], x0[1], x0[0].powi(3)]
    }

    /// `e^(At)` from the triangular structure and variation of constants.
    pub fn exp_closed(&self, t: f64) -> Mat3 {
        let l = self.lambda;
        let e = (0.5 * l * t).exp();
        [
            [e, 0.0, 0.0],
            [-l * t * e, e, self.c * e * t * phi1(l * t)],
            [0.0, 0.0, (1.5 * l * t).exp()],
        ]
    }

    /// `e^(At)` by Taylor series with scaling and squaring.
    pub fn exp_taylor(&self, t: f64) -> Mat3 {
        let a = self.matrix();
        let norm = a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max) * t.abs();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
        let h = t / 2f64.powi(squarings);
        let scaled: Mat3 = a.map(|r| r.map(|v| v * h));
        let mut sum = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let mut term = sum;
        for n in 1..40 {
            term = mat3_mul(&term, &scaled).map(|r| r.map(|v| v / n as f64));
            for i in 0..3 {
                for j in 0..3 {
                    sum[i][j] += term[i][j];
                }
            }
            if term.iter().flatten().all(|v| v.abs() < 1e-18) {
                break;
            }
        }
        for _ in 0..squarings {
            sum = mat3_mul(&sum, &sum);
        }
        sum
    }

    pub fn solve(&self, x0: Point, t: f64) -> Point {
        let e = self.exp_closed(t);
        let y = Self::lift(x0);
        let row = |i: usize| (0..3).map(|j| e[i][j] * y[j]).sum::<f64>();
        [row(0), row(1)]
    }
}

/// Exact solution of the transformed cubic from `x0` at time `t`.
pub fn carleman_solve(lambda: f64, c: f64, x0: Point, t: f64) -> Point {
    CarlemanModel::new(lambda, c).solve(x0, t)
}

/// Relative defect of `g(x(t)) = e^(lambda t) g(x0)` for `g = -(3/2) c x1^2` on the exact solution.
pub fn s1_evolution_check(lambda: f64, c: f64, x0: Point, t: f64) -> Result<f64> {
    if x0[0] == 0.0 || c == 0.0 {
        return Err(Error::invalid("attraction rate vanishes at the starting point"));
    }
    let g = |p: Point| -1.5 * c * p[0] * p[0];
    let end = carleman_solve(lambda, c, x0, t);
    let g0 = g(x0);
    Ok((g(end) - (lambda * t).exp() * g0).abs() / g0.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::flowmap::{flow, IntegratorConfig};
    use crate::strain::strain_rates;
    use proptest::prelude::*;

    fn poly(text: &str) -> Poly2 {
        parse_expression(text).unwrap().to_polynomial().unwrap()
    }

    fn example() -> CubicParams {
        CubicParams::Eigen { lambda: 2.0, c: 2.0 / 3.0, k: -1.0 / 3.0, a00: -2.0 }
    }

    #[test]
    fn quadratic_examples() {
        let (u, v) = make_quadratic_family(QuadraticParams { lambda: 1.0, a20: 1.0 }).components();
        assert_eq!(u, poly("-y + (x+y)^2"));
        assert_eq!(v, poly("x + 2*y - (x+y)^2"));
        let p = QuadraticParams { lambda: 0.0, a20: 1.0 };
        let f = make_quadratic_family(p);
        assert_eq!(f.components(), (poly("(x+y)^2"), poly("-(x+y)^2")));
        assert!(keig_residual(&f, &KeigCandidate::new(quadratic_s2(p), 0.0)).is_zero());
        assert!(quadratic_s2(QuadraticParams { lambda: 2.0, a20: 0.0 }).is_zero());
        assert!(!quadratic_pattern_holds(&poly("1 + y"), &poly("x")));
    }

    #[test]
    fn cubic_example_field() {
        let (u, v) = make_cubic_family(example()).unwrap().components();
        let third = |s: f64| Poly2::monomial(0, 0, s);
        let r3 = sum_power(3).scale(1.0 / 3.0);
        let eu = &(&poly("-2 + x + (x+y)^2") - &r3) + &third(0.0);
        let ev = &poly("1 + y - (x+y)^2") + &r3;
        assert!(u.max_coeff_diff(&eu) < 1e-12);
        assert!(v.max_coeff_diff(&ev) < 1e-12);
        assert!(cubic_s1(example()).unwrap().max_coeff_diff(&poly("(x+y-1)^2")) < 1e-12);
        assert!(make_cubic_family(CubicParams::Eigen { lambda: 1.0, c: 1.0, k: 0.0, a00: 0.0 }).is_err());
    }

    #[test]
    fn cubic_example_eigenvalue_from_samples() {
        let f = make_cubic_family(example()).unwrap();
        let samples: Vec<Point> = (0..40).map(|i| [0.05 * i as f64 - 1.0, 0.5 - 0.03 * i as f64]).collect();
        let (l, res) = best_lambda(&f, &cubic_s1(example()).unwrap(), &samples).unwrap();
        assert!((l - 2.0).abs() < 1e-10 && res < 1e-9);
    }

    #[test]
    fn example_true_attraction_rate_inside_the_band() {
        // the shear-free identity s1 = Q_y only holds where Q_y <= P_x, here 0 <= x+y <= 2
        let f = make_cubic_family(example()).unwrap();
        for (x, y) in [(0.3, 0.2), (1.0, 0.5), (-0.5, 2.0), (0.0, 0.0)] {
            let (s1, _) = strain_rates(&f, [x, y]).unwrap();
            assert!((s1 - (x + y - 1.0f64).powi(2)).abs() < 1e-12);
        }
        let (s1, _) = strain_rates(&f, [3.0, 0.0]).unwrap();
        assert!((s1 - 4.0).abs() > 0.1);
    }

    #[test]
    fn equilibrium_of_example() {
        let e = equilibrium_and_r_solution(example(), 1.0, 3.0).unwrap();
        assert!((e.r_bar - 1.0).abs() < 1e-15);
        assert!((e.s_bar + 5.0 / 3.0).abs() < 1e-14);
        assert!((e.r_t - 1.0).abs() < 1e-14);
        let zero = CubicParams::Eigen { lambda: 0.0, c: 1.0, k: 1.0, a00: 0.0 };
        assert!(equilibrium_and_r_solution(zero, 0.0, 1.0).is_err());
    }

    #[test]
    fn r_solution_matches_integration() {
        let p = CubicParams::Eigen { lambda: -0.8, c: 1.3, k: 0.4, a00: 0.2 };
        let f = make_cubic_family(p).unwrap();
        let end = flow(&f, [0.3, -0.1], 1.2, &IntegratorConfig::default()).unwrap();
        let e = equilibrium_and_r_solution(p, 0.2, 1.2).unwrap();
        assert!((end[0] + end[1] - e.r_t).abs() < 1e-10);
    }

    #[test]
    fn transformed_example() {
        let (u, v) = make_transformed_family(-1.0, &[-1.0]).unwrap().components();
        assert_eq!(u, poly("-0.5*x"));
        assert_eq!(v, poly("x - 0.5*y - x^3"));
        assert!(make_transformed_family(1.0, &[]).is_err());
        for c in [-1.0, 2.0] {
            let f = make_transformed_family(0.7, &[c]).unwrap();
            let claim = transformed_s1_claim(&[c]);
            assert_eq!(claim, Poly2::monomial(2, 0, -1.5 * c));
            assert!(keig_residual(&f, &KeigCandidate::new(claim.clone(), 0.7)).is_zero());
            assert!(keig_residual(&f, &KeigCandidate::new(-claim, 0.7)).is_zero());
        }
    }

    #[test]
    fn mixed_powers_are_not_an_eigenfunction() {
        let samples: Vec<Point> = (0..41).map(|i| [-1.0 + 0.05 * i as f64, 0.3]).collect();
        let r = extended_family_report(-1.0, &[-1.0, 0.5], &samples).unwrap();
        assert!(!r.exact_at_lambda);
        assert!(r.best_resnorm > 1e-3);
        let single = extended_family_report(-1.0, &[-1.0], &samples).unwrap();
        assert!(single.exact_at_lambda && single.best_resnorm < 1e-12);
    }

    #[test]
    fn parameterizations_agree() {
        for (a10, k, a20, b00) in [(1.0, 0.5, -0.7, 0.3), (-2.0, -0.25, 1.1, -1.0)] {
            let pq = CubicParams::Coefficients { a10, k, a20, b00 };
            let e = pq.to_eigen().unwrap();
            let eig = CubicParams::Eigen { lambda: e.lambda, c: e.c, k: e.k, a00: e.a00 };
            let (u1, v1) = make_cubic_family(pq).unwrap().components();
            let (u2, v2) = make_cubic_family(eig).unwrap().components();
            assert!(u1.max_coeff_diff(&u2) < 1e-12 && v1.max_coeff_diff(&v2) < 1e-12);
            assert!((v2.coeff(0, 0) - b00).abs() < 1e-12);
        }
    }

    #[test]
    fn carleman_example() {
        let p = carleman_solve(-1.0, -1.0, [1.0, 0.0], 1.0);
        assert!((p[0] - (-0.5f64).exp()).abs() < 1e-15);
        assert!((p[1] - (-1.5f64).exp()).abs() < 1e-15);
        assert_eq!(carleman_solve(0.3, 2.0, [0.4, -0.9], 0.0), [0.4, -0.9]);
        assert!(s1_evolution_check(-1.0, -1.0, [1.0, 0.0], 2.0).unwrap() < 1e-12);
        assert_eq!(s1_evolution_check(-1.0, -1.0, [1.0, 0.0], 0.0).unwrap(), 0.0);
        assert!(s1_evolution_check(2.0, 0.5, [0.3, 1.0], 1.0).unwrap() < 1e-12);
        assert!(s1_evolution_check(2.0, 0.5, [0.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn carleman_small_lambda_branch() {
        let m = CarlemanModel::new(1e-9, 1.5);
        let (a, b) = (m.exp_closed(0.8), m.exp_taylor(0.8));
        for i in 0..3 {
            for j in 0..3 {
                assert!((a[i][j] - b[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn one_d_examples() {
        let xs: Vec<f64> = (0..201).map(|i| -1.0 + 0.01 * i as f64).collect();
        let r = one_d_residual(&Poly2::x(), 0.5, &xs).unwrap();
        assert!((r.resnorm - 0.5).abs() < 1e-15);
        assert!(r.trivial && r.lambda_star == 0.0);
        let z = one_d_residual(&Poly2::zero(), 3.0, &xs).unwrap();
        assert_eq!(z.resnorm, 0.0);
        let c = one_d_residual(&poly("x - x^3"), 0.0, &xs).unwrap();
        assert!(c.resnorm_star > 0.1 && !c.trivial);
        assert!(one_d_residual(&poly("x*y"), 0.0, &xs).is_err());
    }

    fn arb_cubic() -> impl Strategy<Value = CubicParams> {
        (-2.0f64..2.0, -2.0f64..2.0, 0.1f64..1.0, prop::bool::ANY, -2.0f64..2.0).prop_map(
            |(lambda, c, k, neg, a00)| CubicParams::Eigen { lambda, c, k: if neg { -k } else { k }, a00 },
        )
    }

    proptest! {
        #[test]
        fn cubic_rate_depends_on_x_plus_y_only(p in arb_cubic()) {
            let e = p.to_eigen().unwrap();
            let s1 = cubic_s1(p).unwrap();
            let expected = &Poly2::constant(e.c / (6.0 * e.k * e.k))
                + &(&sum_power(1).scale(e.c / e.k) + &sum_power(2).scale(1.5 * e.c));
            prop_assert!(s1.max_coeff_diff(&expected) < 1e-12);
            let (u, v) = make_cubic_family(p).unwrap().components();
            let r_dot = &Poly2::constant(e.lambda / (6.0 * e.k)) + &sum_power(1).scale(0.5 * e.lambda);
            prop_assert!((&u + &v).max_coeff_diff(&r_dot) < 1e-12);
        }

        #[test]
        fn transform_reproduces_the_two_parameter_field(p in arb_cubic()) {
            let e = p.to_eigen().unwrap();
            prop_assume!(e.lambda.abs() > 0.05);
            let (t, offset) = transformed_coordinates(p).unwrap();
            let g = make_cubic_family(p).unwrap().linear_change(t).unwrap().translate(offset);
            let (u, v) = g.components();
            let (eu, ev) = make_transformed_family(e.lambda, &[e.c]).unwrap().components();
            let scale = 1.0 + e.c.abs() / (e.k * e.k * e.k).abs() + e.a00.abs() + 1.0 / e.k.abs();
            prop_assert!(u.max_coeff_diff(&eu) < 1e-12 * scale);
            prop_assert!(v.max_coeff_diff(&ev) < 1e-12 * scale);
            // pulled back, the attraction rate is +(3/2) c x1^2
            let inv = t.inverse().unwrap();
            let b = inv.apply(offset);
            let s1 = cubic_s1(p).unwrap().affine_substitute(inv.rows(), b);
            prop_assert!(s1.max_coeff_diff(&Poly2::monomial(2, 0, 1.5 * e.c)) < 1e-10 * scale);
        }

        #[test]
        fn closed_form_exponential_matches_taylor(l in -2.0f64..2.0, c in -2.0f64..2.0, t in 0.0f64..2.0) {
            let m = CarlemanModel::new(l, c);
            let (a, b) = (m.exp_closed(t), m.exp_taylor(t));
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!((a[i][j] - b[i][j]).abs() < 1e-12 * (1.0 + a[i][j].abs()));
                }
            }
        }
    }
}
