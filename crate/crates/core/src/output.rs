//! Text formats: CSV and PGM for grid fields, JSON with full-precision numbers.

use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::strain::ScalarField;

/// Formats `v` with 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with header `x,y,value`, one row per node in row-major order.
pub fn field_to_csv(field: &ScalarField) -> String {
    let g = field.grid();
    let mut out = String::with_capacity(64 * g.len() + 16);
    out.push_str("x,y,value\n");
    for (p, v) in g.nodes().zip(field.values()) {
        let _ = writeln!(out, "{},{},{}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(*v));
    }
    out
}

/// Plain PGM (P2) with the minimum mapped to 0 and the maximum to 255.
///
/// The first image row is the largest `y`, so the picture is upright.
pub fn field_to_pgm(field: &ScalarField) -> String {
    let g = field.grid();
    let (lo, hi) = (field.min(), field.max());
    let span = hi - lo;
    let mut out = format!("P2\n{} {}\n255\n", g.nx, g.ny);
    for j in (0..g.ny).rev() {
        let row: Vec<String> = (0..g.nx)
            .map(|i| {
                let level = if span > 0.0 {
                    ((field.get(i, j) - lo) / span * 255.0).round() as u8
                } else {
                    0
                };
                level.to_string()
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// JSON formatter writing every float with 17 significant digits.
struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON in which all floats carry 17 significant digits.
///
/// Non-finite floats serialize as `null` in serde_json; callers reject them first.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strain::{sample_grid, Grid2D};

    #[test]
    fn csv_layout() {
        let g = Grid2D::new(0.0, 1.0, 2, -1.0, 1.0, 2).unwrap();
        let f = sample_grid(&g, |[x, y]| Ok(x + 10.0 * y)).unwrap();
        let csv = field_to_csv(&f);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "x,y,value");
        assert_eq!(
            lines[2],
            "1.0000000000000000e0,-1.0000000000000000e0,-9.0000000000000000e0"
        );
        let back: f64 = lines[4].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(back, 11.0);
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.0f64.sqrt(), 6.02e23, 1e-300] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }

    #[test]
    fn pgm_maps_range() {
        let g = Grid2D::new(0.0, 1.0, 3, 0.0, 1.0, 2).unwrap();
        let f = sample_grid(&g, |[x, y]| Ok(x + y)).unwrap();
        let pgm = field_to_pgm(&f);
        assert_eq!(pgm, "P2\n3 2\n255\n128 191 255\n0 64 128\n");
    }

    #[test]
    fn json_numbers() {
        #[derive(Serialize)]
        struct R {
            lambda: f64,
            samples: usize,
        }
        let s = to_json(&R { lambda: 0.5, samples: 3 }).unwrap();
        assert_eq!(s, r#"{"lambda":5.0000000000000000e-1,"samples":3}"#);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["lambda"].as_f64(), Some(0.5));
    }
}
