//! Lyapunov exponent fields and Koopman eigenfunctions for planar autonomous flows.
//!
//! The crate is organised bottom-up:
//!
//! - [`expr`]: a small expression grammar in `x`, `y` and an exact sparse
//!   bivariate polynomial type, [`Poly2`].
//! - [`vectorfield`]: planar vector fields (polynomial or the built-in
//!   nonlinear saddle) with analytic Jacobians.
//! - [`strain`]: the Eulerian rate-of-strain tensor, attraction/repulsion rates
//!   `s1 <= s2`, grid sampling and ridge/trench extraction.
//! - [`flowmap`]: fixed-step RK4 trajectories, Cauchy-Green tensors and FTLE fields.
//! - [`koopman`]: generator action, eigenfunction residuals, pullback
//!   construction from a data line and the saddle eigenfunction family.
//! - [`families`]: polynomial vector-field families whose rate fields are
//!   Koopman eigenfunctions, plus the exact Carleman lift of the transformed cubic.
//! - [`series`]: eigenfunction series on the saddle built by greedy Taylor cancellation.
//! - [`output`]: CSV, PGM and JSON writers with 17 significant digits.

pub mod dual;
pub mod error;
pub mod expr;
pub mod families;
pub mod flowmap;
pub mod koopman;
pub mod output;
pub mod series;
pub mod strain;
pub mod vectorfield;

pub use error::{Error, Result};
pub use expr::{parse_expression, Expression, Poly2};
pub use families::{CarlemanModel, CubicParams, QuadraticParams};
pub use flowmap::{IntegratorConfig, Trajectory};
pub use koopman::{
    DataFunction, DataSurface, KeigCandidate, Observable, PullbackConfig, SaddleEigenfunction,
};
pub use series::{PhiNLambda, SeriesTerm, TaylorSeq};
pub use strain::{Grid2D, RateKind, ScalarField, SymTensor2};
pub use vectorfield::{Mat2, VectorField2D};

/// A point (or vector) in the plane, `[x, y]`.
pub type Point = [f64; 2];
