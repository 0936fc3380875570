use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use ilekoop::families::{
    carleman_solve, extended_family_report, make_cubic_family, make_quadratic_family,
    make_transformed_family, one_d_residual, s1_evolution_check,
};
use ilekoop::flowmap::ftle_field;
use ilekoop::koopman::{keig_residual, pullback_eigenfunction, residual_report};
use ilekoop::output::{field_to_csv, field_to_pgm, fmt_f64, to_json};
use ilekoop::series::{attraction_series_coefficients, decompose_monomial, partial_sum_check};
use ilekoop::strain::{default_grad_tol, extract_extremal_set, rate_field, ExtremalMode};
use ilekoop::{
    CubicParams, DataSurface, Grid2D, IntegratorConfig, KeigCandidate, Point, PullbackConfig,
    QuadraticParams, RateKind, ScalarField, VectorField2D,
};

use crate::input;
use crate::{
    CarlemanArgs, Command, FamilyCommand, FtleArgs, IleArgs, KeigCheckArgs, OnedArgs, PullbackArgs,
    SeriesArgs,
};

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Ile(a) => ile(a),
        Command::Ftle(a) => ftle(a),
        Command::KeigCheck(a) => keig_check(a),
        Command::Pullback(a) => pullback(a),
        Command::Family(f) => family(f),
        Command::Carleman(a) => carleman(a),
        Command::Series(a) => series(a),
        Command::Oned(a) => oned(a),
    }
}

fn emit(v: &Value) -> Result<()> {
    println!("{}", to_json(v)?);
    Ok(())
}

fn grid(text: &str) -> Result<Grid2D> {
    text.parse::<Grid2D>().with_context(|| format!("grid `{text}`"))
}

fn write_field(field: &ScalarField, out: &str, pgm: Option<&str>) -> Result<()> {
    input::write_sink(out, &field_to_csv(field))?;
    if let Some(p) = pgm {
        input::write_sink(p, &field_to_pgm(field))?;
    }
    Ok(())
}

fn ile(a: IleArgs) -> Result<()> {
    let f = input::field(&a.field.field)?;
    let g = grid(&a.grid)?;
    let which: RateKind = a.rate.parse()?;
    let field = rate_field(&f, &g, which)?;
    write_field(&field, &a.out, a.pgm.as_deref())?;
    if let Some(mode) = a.extract {
        let mode: ExtremalMode = mode.parse()?;
        let grad_tol = a.grad_tol.unwrap_or_else(|| default_grad_tol(&field));
        let pts = extract_extremal_set(&field, mode, grad_tol, a.curv_tol)?;
        emit(&json!({ "mode": mode, "grad_tol": grad_tol, "curv_tol": a.curv_tol, "points": pts }))?;
    }
    Ok(())
}

fn ftle(a: FtleArgs) -> Result<()> {
    let f = input::field(&a.field.field)?;
    let g = grid(&a.grid)?;
    let cfg = IntegratorConfig::new(a.step)?;
    let field = ftle_field(&f, &g, a.time, a.delta, &cfg)?;
    write_field(&field, &a.out, a.pgm.as_deref())
}

/// Radical-inverse sequence in `base`.
fn halton(mut i: usize, base: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn sample_box(f: &VectorField2D, domain: Option<&str>) -> Result<[f64; 4]> {
    let text = match domain {
        Some(d) => d.to_string(),
        None if f.is_saddle() => "-1:1,-0.9:0.9".into(),
        None => "-1:1,-1:1".into(),
    };
    let Some((xs, ys)) = text.split_once(',') else {
        bail!("domain must be `xmin:xmax,ymin:ymax`");
    };
    let pair = |s: &str| -> Result<(f64, f64)> {
        let Some((a, b)) = s.split_once(':') else {
            bail!("domain range `{s}` must be `min:max`");
        };
        Ok((a.trim().parse()?, b.trim().parse()?))
    };
    let ((x0, x1), (y0, y1)) = (pair(xs)?, pair(ys)?);
    if !(x0 < x1 && y0 < y1) {
        bail!("empty sampling domain `{text}`");
    }
    Ok([x0, x1, y0, y1])
}

fn keig_check(a: KeigCheckArgs) -> Result<()> {
    let f = input::field(&a.field.field)?;
    let g = input::polynomial(&a.g)?;
    if a.samples == 0 {
        bail!("--samples must be positive");
    }
    let [x0, x1, y0, y1] = sample_box(&f, a.domain.as_deref())?;
    let samples: Vec<Point> = (1..=a.samples)
        .map(|i| [x0 + (x1 - x0) * halton(i, 2), y0 + (y1 - y0) * halton(i, 3)])
        .collect();
    let cand = KeigCandidate::new(g, a.lambda);
    let report = residual_report(&f, &cand, &samples)?;
    let mut v = serde_json::to_value(report)?;
    if a.exact {
        let r = keig_residual(&f, &cand);
        v["exact_zero"] = json!(r.is_zero());
        v["exact_residual"] = serde_json::to_value(&r)?;
    }
    emit(&v)
}

fn pullback(a: PullbackArgs) -> Result<()> {
    let f = input::field(&a.field.field)?;
    let [bx, by, dx, dy] = input::numbers_exact::<4>(&a.line).context("--line")?;
    let surf = DataSurface::new([bx, by], [dx, dy], input::data_function(&a.h)?)?;
    let pts = input::points(&input::read_source(&a.points)?)?;
    let cfg = PullbackConfig { integrator: IntegratorConfig::new(a.step)?, t_max: a.t_max, time_tol: a.time_tol };
    let results: Vec<_> = {
        use rayon::prelude::*;
        pts.par_iter().map(|&p| pullback_eigenfunction(&f, &surf, a.lambda, p, &cfg)).collect()
    };
    let mut out = String::from("x,y,value,r_star,s_star,transverse\n");
    for (p, r) in pts.iter().zip(results) {
        let r = r.with_context(|| format!("pullback from ({}, {})", p[0], p[1]))?;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(p[0]),
            fmt_f64(p[1]),
            fmt_f64(r.value),
            fmt_f64(r.r_star),
            fmt_f64(r.s_star),
            r.transverse
        ));
    }
    input::write_sink(&a.out, &out)
}

fn family(cmd: FamilyCommand) -> Result<()> {
    let field = match cmd {
        FamilyCommand::Quadratic { lambda, a20 } => make_quadratic_family(QuadraticParams { lambda, a20 }),
        FamilyCommand::Cubic { lambda, c, k, a00, a10, a20, b00 } => {
            let params = match (lambda, c, a00, a10, a20, b00) {
                (Some(lambda), Some(c), Some(a00), None, None, None) => CubicParams::Eigen { lambda, c, k, a00 },
                (None, None, None, Some(a10), Some(a20), Some(b00)) => {
                    CubicParams::Coefficients { a10, k, a20, b00 }
                }
                _ => bail!("cubic family takes either --lambda --c --k --a00 or --a10 --k --a20 --b00"),
            };
            make_cubic_family(params)?
        }
        FamilyCommand::Transformed { lambda, coeffs } => {
            let coeffs = input::numbers(&coeffs)?;
            let field = make_transformed_family(lambda, &coeffs)?;
            if coeffs.len() > 1 {
                let samples: Vec<Point> =
                    (1..=200).map(|i| [2.0 * halton(i, 2) - 1.0, 2.0 * halton(i, 3) - 1.0]).collect();
                let rep = extended_family_report(lambda, &coeffs, &samples)?;
                eprintln!("note: attraction-rate eigenfunction claim unverified for mixed powers: {}", to_json(&rep)?);
            }
            field
        }
    };
    emit(&serde_json::to_value(&field)?)
}

fn carleman(a: CarlemanArgs) -> Result<()> {
    let x0 = input::numbers_exact::<2>(&a.x0).context("--x0")?;
    let end = carleman_solve(a.lambda, a.c, x0, a.time);
    if !(end[0].is_finite() && end[1].is_finite()) {
        return Err(ilekoop::Error::NonFinite("Carleman endpoint".into()).into());
    }
    let evo = s1_evolution_check(a.lambda, a.c, x0, a.time).ok();
    emit(&json!({
        "lambda": a.lambda,
        "c": a.c,
        "x0": x0,
        "t": a.time,
        "endpoint": end,
        "s1_evolution_error": evo,
    }))
}

fn series(a: SeriesArgs) -> Result<()> {
    let ys = input::numbers(&a.y)?;
    if a.n == 0 {
        bail!("--N must be positive");
    }
    let mut sums = Vec::new();
    let v = match a.target.as_str() {
        "3y2" | "s1" => {
            let constant = if a.target == "s1" { -1.0 } else { 0.0 };
            for &y in &ys {
                for n in 1..=a.n {
                    let p = partial_sum_check(n, y)?;
                    sums.push(json!({
                        "N": n, "y": y, "value": constant + p.value, "error": p.error, "tail_bound": p.tail_bound,
                    }));
                }
            }
            let mut v = json!({ "coefficients": attraction_series_coefficients(a.n), "eigenvalues":
                (1..=a.n).map(|k| -2.0 * k as f64).collect::<Vec<_>>() });
            if a.target == "s1" {
                v["constant"] = json!(-1.0);
            }
            v
        }
        "y" => {
            let d = decompose_monomial(0, 1, a.n)?;
            for &y in &ys {
                for n in 1..=a.n {
                    let value = d.partial_sum([0.0, y], n)?;
                    sums.push(json!({ "N": n, "y": y, "value": value, "error": (value - y).abs() }));
                }
            }
            json!({ "coefficients": d.coefficients, "eigenvalues": d.lambdas })
        }
        other => bail!("unknown series target `{other}` (expected s1, 3y2 or y)"),
    };
    let mut v = v;
    v["partial_sums"] = Value::Array(sums);
    emit(&v)
}

fn oned(a: OnedArgs) -> Result<()> {
    let f = input::univariate_x(&a.f)?;
    if a.n < 2 || !(a.xmin < a.xmax) {
        bail!("need --n >= 2 and --xmin < --xmax");
    }
    let g = Grid2D::new(a.xmin, a.xmax, a.n, 0.0, 1.0, 2)?;
    let xs: Vec<f64> = (0..a.n).map(|i| g.x(i)).collect();
    let rep = one_d_residual(&f, a.lambda, &xs)?;
    emit(&serde_json::to_value(rep)?)
}
