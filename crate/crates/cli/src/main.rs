//! `ilekoop` command-line front end.
//!
//! Exit status: 0 on success, 1 for usage and parse errors, 2 for domain or
//! numeric failures.

mod commands;
mod input;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "ilekoop", version, about = "Lyapunov exponent fields and Koopman eigenfunctions of planar flows")]
pub struct Cli {
    /// Worker threads for grid computations (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample the attraction (s1) or repulsion (s2) rate on a grid.
    Ile(IleArgs),
    /// Finite-time Lyapunov exponent field.
    Ftle(FtleArgs),
    /// Residual of a trial eigenfunction g at eigenvalue lambda.
    KeigCheck(KeigCheckArgs),
    /// Eigenfunction values by pulling points back to a data line.
    Pullback(PullbackArgs),
    /// Emit a vector-field family as JSON.
    #[command(subcommand)]
    Family(FamilyCommand),
    /// Exact solution of the transformed cubic by its Carleman lift.
    Carleman(CarlemanArgs),
    /// Eigenfunction series on the saddle.
    Series(SeriesArgs),
    /// One-dimensional residual f'' f - lambda f'.
    Oned(OnedArgs),
}

#[derive(Args, Debug)]
pub struct FieldArg {
    /// `saddle`, `expr:P;Q`, a field JSON file, or `-` for JSON on stdin.
    #[arg(long)]
    pub field: String,
}

#[derive(Args, Debug)]
pub struct IleArgs {
    #[command(flatten)]
    pub field: FieldArg,
    /// `xmin:xmax:nx,ymin:ymax:ny`
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, default_value = "s1")]
    pub rate: String,
    /// CSV output (`-` for stdout).
    #[arg(long)]
    pub out: String,
    #[arg(long)]
    pub pgm: Option<String>,
    /// Print the ridge or trench node set as JSON on stdout.
    #[arg(long)]
    pub extract: Option<String>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long, default_value_t = ilekoop::strain::DEFAULT_CURV_TOL)]
    pub curv_tol: f64,
}

#[derive(Args, Debug)]
pub struct FtleArgs {
    #[command(flatten)]
    pub field: FieldArg,
    #[arg(long, allow_hyphen_values = true)]
    pub time: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value_t = ilekoop::flowmap::DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long)]
    pub out: String,
    #[arg(long)]
    pub pgm: Option<String>,
}

#[derive(Args, Debug)]
pub struct KeigCheckArgs {
    #[command(flatten)]
    pub field: FieldArg,
    /// Trial eigenfunction as an expression in x and y.
    #[arg(long, allow_hyphen_values = true)]
    pub g: String,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Sampling box `xmin:xmax,ymin:ymax` (default -1:1,-1:1; -1:1,-0.9:0.9 for the saddle).
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// Also expand the residual exactly as a polynomial.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Args, Debug)]
pub struct PullbackArgs {
    #[command(flatten)]
    pub field: FieldArg,
    /// Data line `x0,y0,dx,dy`.
    #[arg(long, allow_hyphen_values = true)]
    pub line: String,
    /// Data function: a polynomial in s or a constant.
    #[arg(long, allow_hyphen_values = true)]
    pub h: String,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    /// File of `x,y` lines (`-` for stdin).
    #[arg(long)]
    pub points: String,
    #[arg(long)]
    pub out: String,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value_t = 50.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub time_tol: f64,
}

#[derive(Subcommand, Debug)]
pub enum FamilyCommand {
    /// Quadratic family with s2 an eigenfunction.
    Quadratic {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true)]
        a20: f64,
    },
    /// Cubic family with s1 an eigenfunction, from (lambda, c, k, a00) or (a10, k, a20, b00).
    Cubic {
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        #[arg(long, allow_hyphen_values = true)]
        a00: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        a10: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        a20: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        b00: Option<f64>,
    },
    /// Translated two-parameter form, optionally with higher powers of x1.
    Transformed {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// `c3[,c4,...]`
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
    },
}

#[derive(Args, Debug)]
pub struct CarlemanArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long, allow_hyphen_values = true)]
    pub time: f64,
}

#[derive(Args, Debug)]
pub struct SeriesArgs {
    /// `s1`, `3y2` or `y`.
    #[arg(long)]
    pub target: String,
    #[arg(long = "N", alias = "n")]
    pub n: usize,
    /// One or more comma-separated y values.
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
}

#[derive(Args, Debug)]
pub struct OnedArgs {
    /// Polynomial in x.
    #[arg(long, allow_hyphen_values = true)]
    pub f: String,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub xmin: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub xmax: f64,
    #[arg(long, default_value_t = 201)]
    pub n: usize,
    /// Eigenvalue at which the residual is also reported.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub lambda: f64,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<ilekoop::Error>() {
        Some(e) if e.is_numeric() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
