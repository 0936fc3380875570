//! Parsing of field specifications, point lists and small numeric lists.

use std::fs;
use std::io::Read;

use anyhow::{bail, Context, Result};
use ilekoop::expr::parse_univariate;
use ilekoop::koopman::DataFunction;
use ilekoop::{parse_expression, Point, Poly2, VectorField2D};

/// Reads a file, or stdin for `-`.
pub fn read_source(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {path}"))
    }
}

/// Writes a file, or stdout for `-`.
pub fn write_sink(path: &str, text: &str) -> Result<()> {
    if path == "-" {
        print!("{text}");
        Ok(())
    } else {
        fs::write(path, text).with_context(|| format!("writing {path}"))
    }
}

pub fn polynomial(text: &str) -> Result<Poly2> {
    let e = parse_expression(text).with_context(|| format!("parsing `{text}`"))?;
    Ok(e.to_polynomial()?)
}

/// `saddle`, `expr:P;Q`, a JSON file path, or `-` for JSON on stdin.
pub fn field(source: &str) -> Result<VectorField2D> {
    if source == "saddle" {
        return Ok(VectorField2D::saddle());
    }
    if let Some(rest) = source.strip_prefix("expr:") {
        let Some((p, q)) = rest.split_once(';') else {
            bail!("inline field must be `expr:P;Q`");
        };
        return Ok(VectorField2D::polynomial(polynomial(p)?, polynomial(q)?));
    }
    let text = read_source(source)?;
    serde_json::from_str(&text).with_context(|| format!("field JSON in {source}"))
}

/// A polynomial in `s`, or a plain constant.
pub fn data_function(text: &str) -> Result<DataFunction> {
    let e = parse_univariate(text, "s").with_context(|| format!("parsing data function `{text}`"))?;
    Ok(DataFunction::from_poly(&e.to_polynomial()?)?)
}

pub fn univariate_x(text: &str) -> Result<Poly2> {
    let e = parse_univariate(text, "x").with_context(|| format!("parsing `{text}`"))?;
    Ok(e.to_polynomial()?)
}

pub fn numbers(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("`{t}` is not a number")))
        .collect()
}

pub fn numbers_exact<const N: usize>(text: &str) -> Result<[f64; N]> {
    let v = numbers(text)?;
    v.try_into().map_err(|v: Vec<f64>| anyhow::anyhow!("expected {N} comma-separated numbers, got {}", v.len()))
}

/// Points as `x,y` lines; blank lines, `#` comments and a non-numeric header are skipped.
pub fn points(text: &str) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match numbers_exact::<2>(line) {
            Ok(p) => out.push(p),
            Err(_) if n == 0 => continue,
            Err(e) => return Err(e.context(format!("points line {}", n + 1))),
        }
    }
    if out.is_empty() {
        bail!("no points given");
    }
    Ok(out)
}
