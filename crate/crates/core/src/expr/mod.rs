//! Expression parsing and exact bivariate polynomial algebra.
//!
//! Grammar (whitespace is insignificant, implicit multiplication is rejected):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | power
//! power  := atom ('^' uint)?
//! atom   := number | 'x' | 'y' | '(' expr ')'
//! ```

mod parse;
mod poly;

pub use parse::{parse_expression, parse_univariate, Expression, Var};
pub use poly::{Poly2, Term, CANONICAL_ZERO, MAX_DEGREE};
