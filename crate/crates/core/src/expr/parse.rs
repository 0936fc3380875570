use std::fmt;

use crate::error::{Error, Result};
use crate::Point;

use super::poly::{Poly2, MAX_DEGREE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

/// Abstract syntax tree of a parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Num(f64),
    Var(Var),
    Neg(Box<Expression>),
    Add(Box<Expression>, Box<Expression>),
    Sub(Box<Expression>, Box<Expression>),
    Mul(Box<Expression>, Box<Expression>),
    Pow(Box<Expression>, u32),
}

impl Expression {
    pub fn eval(&self, pt: Point) -> f64 {
        match self {
            Expression::Num(v) => *v,
            Expression::Var(Var::X) => pt[0],
            Expression::Var(Var::Y) => pt[1],
            Expression::Neg(e) => -e.eval(pt),
            Expression::Add(a, b) => a.eval(pt) + b.eval(pt),
            Expression::Sub(a, b) => a.eval(pt) - b.eval(pt),
            Expression::Mul(a, b) => a.eval(pt) * b.eval(pt),
            Expression::Pow(b, n) => b.eval(pt).powi(*n as i32),
        }
    }

    /// Expands the expression into canonical polynomial form.
    pub fn to_polynomial(&self) -> Result<Poly2> {
        let p = match self {
            Expression::Num(v) => Poly2::constant(*v),
            Expression::Var(Var::X) => Poly2::x(),
            Expression::Var(Var::Y) => Poly2::y(),
            Expression::Neg(e) => -e.to_polynomial()?,
            Expression::Add(a, b) => a.to_polynomial()? + b.to_polynomial()?,
            Expression::Sub(a, b) => a.to_polynomial()? - b.to_polynomial()?,
            Expression::Mul(a, b) => {
                let (pa, pb) = (a.to_polynomial()?, b.to_polynomial()?);
                let deg = pa.degree().unwrap_or(0) + pb.degree().unwrap_or(0);
                if deg > MAX_DEGREE {
                    return Err(Error::DegreeTooLarge(deg));
                }
                &pa * &pb
            }
            Expression::Pow(b, n) => {
                let pb = b.to_polynomial()?;
                let deg = pb.degree().unwrap_or(0).saturating_mul(*n);
                if deg > MAX_DEGREE {
                    return Err(Error::DegreeTooLarge(deg));
                }
                pb.pow(*n)
            }
        };
        Ok(p)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expression::Add(..) | Expression::Sub(..) => 1,
            Expression::Mul(..) => 2,
            Expression::Neg(_) => 3,
            Expression::Pow(..) => 4,
            Expression::Num(_) | Expression::Var(_) => 5,
        }
    }
}

struct Wrapped<'a>(&'a Expression, bool);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.precedence();
        match self {
            Expression::Num(v) => write!(f, "{v:?}"),
            Expression::Var(Var::X) => f.write_str("x"),
            Expression::Var(Var::Y) => f.write_str("y"),
            Expression::Neg(e) => write!(f, "-{}", Wrapped(e, e.precedence() < p)),
            Expression::Add(a, b) | Expression::Sub(a, b) | Expression::Mul(a, b) => {
                let op = match self {
                    Expression::Add(..) => '+',
                    Expression::Sub(..) => '-',
                    _ => '*',
                };
                write!(
                    f,
                    "{} {op} {}",
                    Wrapped(a, a.precedence() < p),
                    Wrapped(b, b.precedence() <= p)
                )
            }
            Expression::Pow(b, n) => write!(f, "{}^{n}", Wrapped(b, b.precedence() < 5)),
        }
    }
}

/// Parses an expression in the variables `x` and `y`.
pub fn parse_expression(text: &str) -> Result<Expression> {
    Parser::new(text, [("x", Var::X), ("y", Var::Y)].as_slice()).parse()
}

/// Parses an expression in a single named variable, which is mapped to [`Var::X`].
pub fn parse_univariate(text: &str, name: &str) -> Result<Expression> {
    Parser::new(text, [(name, Var::X)].as_slice()).parse()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [(&'a str, Var)],
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, vars: &'a [(&'a str, Var)]) -> Self {
        Parser { src: text.as_bytes(), pos: 0, vars }
    }

    fn syntax(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Syntax { offset, message: message.into() }
    }

    fn parse(mut self) -> Result<Expression> {
        if let Some(i) = self.src.iter().position(|b| !b.is_ascii()) {
            return Err(self.syntax(i, "non-ASCII input"));
        }
        self.skip_ws();
        if self.pos == self.src.len() {
            return Err(self.syntax(0, "empty expression"));
        }
        let e = self.expr()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(self.syntax(self.pos, format!("unexpected `{}`", self.src[self.pos] as char)));
        }
        Ok(e)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == b'+' {
                Expression::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expression::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expression> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expression::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(c) if c.is_ascii_alphanumeric() || c == b'(' || c == b'.' => {
                    return Err(self.syntax(self.pos, "implicit multiplication is not supported"));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expression> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expression::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.exponent()?;
            return Ok(Expression::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<u32> {
        let start = match self.peek() {
            Some(b'-') => return Err(Error::NegativeExponent { offset: self.pos }),
            Some(c) if c.is_ascii_digit() || c == b'.' => self.pos,
            Some(_) => return Err(Error::NonIntegerExponent { offset: self.pos }),
            None => return Err(self.syntax(self.pos, "missing exponent")),
        };
        let text = self.number_text();
        if !text.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::NonIntegerExponent { offset: start });
        }
        text.parse::<u32>()
            .map_err(|_| Error::DegreeTooLarge(u32::MAX))
    }

    /// Consumes `digits ('.' digits?)? ([eE] [+-]? digits)?` or `'.' digits ...`.
    fn number_text(&mut self) -> &'a str {
        let start = self.pos;
        let src = self.src;
        let digits = |p: &mut usize| {
            while *p < src.len() && src[*p].is_ascii_digit() {
                *p += 1;
            }
        };
        digits(&mut self.pos);
        if self.pos < src.len() && src[self.pos] == b'.' {
            self.pos += 1;
            digits(&mut self.pos);
        }
        if self.pos < src.len() && matches!(src[self.pos], b'e' | b'E') {
            let mut p = self.pos + 1;
            if p < src.len() && matches!(src[p], b'+' | b'-') {
                p += 1;
            }
            if p < src.len() && src[p].is_ascii_digit() {
                digits(&mut p);
                self.pos = p;
            }
        }
        // ASCII was checked up front.
        std::str::from_utf8(&src[start..self.pos]).unwrap_or_default()
    }

    fn atom(&mut self) -> Result<Expression> {
        let start = match self.peek() {
            Some(_) => self.pos,
            None => return Err(self.syntax(self.pos, "unexpected end of input")),
        };
        let c = self.src[start];
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.syntax(self.pos, "expected `)`"));
            }
            self.pos += 1;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            let text = self.number_text();
            return text
                .parse::<f64>()
                .map(Expression::Num)
                .map_err(|_| self.syntax(start, format!("malformed number `{text}`")));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
            return self
                .vars
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| Expression::Var(*v))
                .ok_or_else(|| Error::UnknownIdentifier { name: name.to_string(), offset: start });
        }
        Err(self.syntax(start, format!("unexpected `{}`", c as char)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x() -> Box<Expression> {
        Box::new(Expression::Var(Var::X))
    }
    fn y() -> Box<Expression> {
        Box::new(Expression::Var(Var::Y))
    }

    #[test]
    fn parses_sum_with_power() {
        let e = parse_expression("x + y^2").unwrap();
        assert_eq!(e, Expression::Add(x(), Box::new(Expression::Pow(y(), 2))));
    }

    #[test]
    fn parses_negation_and_grouping() {
        let e = parse_expression("-y + x*(x+y)").unwrap();
        let expected = Expression::Add(
            Box::new(Expression::Neg(y())),
            Box::new(Expression::Mul(x(), Box::new(Expression::Add(x(), y())))),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse_expression("-y^2").unwrap();
        assert_eq!(e, Expression::Neg(Box::new(Expression::Pow(y(), 2))));
        assert_eq!(e.eval([0.0, 3.0]), -9.0);
    }

    #[test]
    fn rejects_bad_exponents() {
        assert_eq!(parse_expression("x^-1"), Err(Error::NegativeExponent { offset: 2 }));
        assert!(matches!(parse_expression("x^1.5"), Err(Error::NonIntegerExponent { .. })));
        assert!(matches!(parse_expression("x^y"), Err(Error::NonIntegerExponent { .. })));
        assert!(matches!(parse_expression("x^2^3"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn rejects_unknown_identifiers_and_implicit_products() {
        assert_eq!(
            parse_expression("x + sqrt"),
            Err(Error::UnknownIdentifier { name: "sqrt".into(), offset: 4 })
        );
        assert!(matches!(parse_expression("2x"), Err(Error::Syntax { offset: 1, .. })));
        assert!(matches!(parse_expression("(x)(y)"), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse_expression(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression("x +"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression("(x"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn reports_byte_offsets() {
        match parse_expression("x + * y") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn number_forms() {
        assert_eq!(parse_expression("1.5e-3").unwrap(), Expression::Num(1.5e-3));
        assert_eq!(parse_expression(".25").unwrap(), Expression::Num(0.25));
        assert_eq!(parse_expression("2.").unwrap(), Expression::Num(2.0));
    }

    #[test]
    fn univariate_maps_name_to_first_variable() {
        let e = parse_univariate("s^2 - 1", "s").unwrap();
        assert_eq!(e.eval([3.0, 100.0]), 8.0);
        assert!(matches!(parse_univariate("x", "s"), Err(Error::UnknownIdentifier { .. })));
    }

    #[test]
    fn rejects_exponent_overflow() {
        assert!(matches!(
            parse_expression("(x+y)^65").unwrap().to_polynomial(),
            Err(Error::DegreeTooLarge(65))
        ));
        assert!(matches!(
            parse_expression("x^40*y^30").unwrap().to_polynomial(),
            Err(Error::DegreeTooLarge(70))
        ));
    }

    fn abs_eval(e: &Expression, pt: Point) -> f64 {
        match e {
            Expression::Num(v) => v.abs(),
            Expression::Var(_) => e.eval(pt).abs(),
            Expression::Neg(a) => abs_eval(a, pt),
            Expression::Add(a, b) | Expression::Sub(a, b) => abs_eval(a, pt) + abs_eval(b, pt),
            Expression::Mul(a, b) => abs_eval(a, pt) * abs_eval(b, pt),
            Expression::Pow(a, n) => abs_eval(a, pt).powi(*n as i32),
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expression> {
        let leaf = prop_oneof![
            (0u32..1000).prop_map(|n| Expression::Num(n as f64 / 8.0)),
            Just(Expression::Var(Var::X)),
            Just(Expression::Var(Var::Y)),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expression::Neg(Box::new(e))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expression::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expression::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expression::Mul(Box::new(a), Box::new(b))),
                (inner, 0u32..4).prop_map(|(a, n)| Expression::Pow(Box::new(a), n)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in arb_expr()) {
            let text = e.to_string();
            let back = parse_expression(&text).unwrap();
            prop_assert_eq!(back, e);
        }

        #[test]
        fn polynomial_agrees_with_tree_evaluation(
            e in arb_expr(),
            pts in proptest::collection::vec((-1.5f64..1.5, -1.5f64..1.5), 100),
        ) {
            let p = match e.to_polynomial() {
                Ok(p) => p,
                Err(_) => return Ok(()),
            };
            for (a, b) in pts {
                let direct = e.eval([a, b]);
                let via = p.eval([a, b]);
                // relative to the magnitude of the summands on either route
                let scale = abs_eval(&e, [a, b]).max(p.eval_abs([a, b])).max(1.0);
                prop_assert!((direct - via).abs() <= 1e-12 * scale,
                    "{e}: {direct} vs {via}");
            }
        }
    }
}
