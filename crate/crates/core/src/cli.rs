//! The `zonalhop` command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::checks::run_checks;
use crate::convolution::{conv_lambda_coeffs, CapFunction, HopConvolution};
use crate::descriptor::KernelDescriptor;
use crate::error::Error;
use crate::families::cap_kernel_coefficients;
use crate::gegenbauer::GegenbauerParams;
use crate::interpolation::{solve_interpolation, Interpolant};
use crate::kernel::Kernel;
use crate::spd::{generate_points, PointScheme, PointSet};
use crate::transform::fourier_transform;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "zonalhop",
    version,
    about = "Zonal kernels, dimension hopping and interpolation on spheres"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Gegenbauer index λ.
    #[arg(long, global = true, conflicts_with = "sphere_dim")]
    pub lambda: Option<f64>,
    /// Sphere dimension d, giving λ = (d - 1)/2.
    #[arg(long, global = true)]
    pub sphere_dim: Option<u32>,
    /// Truncation N of coefficient tables.
    #[arg(long, global = true, default_value_t = 20)]
    pub trunc: usize,
    /// Gauss–Legendre nodes per panel.
    #[arg(long, global = true, default_value_t = 64)]
    pub quad_order: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance override.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    /// Equispaced in x.
    X,
    /// Equispaced in θ.
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    RandomSeeded,
    FibonacciS2,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate a kernel on a grid.
    Eval {
        /// Kernel descriptor JSON, or @file.
        #[arg(long)]
        kernel: String,
        #[arg(long, default_value_t = 11)]
        points: usize,
        #[arg(long, value_enum, default_value_t = GridKind::X)]
        grid: GridKind,
    },
    /// Expansion coefficients against W^λ_n.
    Coeffs {
        #[arg(long)]
        kernel: String,
    },
    /// Run the identity checks.
    Verify {
        /// Run only the named check (repeatable).
        #[arg(long = "check")]
        checks: Vec<String>,
        /// List check names and exit.
        #[arg(long)]
        list: bool,
    },
    /// Convolve two kernels, or a cap with itself.
    Conv {
        #[arg(long, required_unless_present = "cap")]
        kernel: Option<String>,
        /// Second factor; the first is reused when absent.
        #[arg(long)]
        kernel2: Option<String>,
        /// Use χ_[c,1] for both factors.
        #[arg(long, conflicts_with_all = ["kernel", "kernel2"])]
        cap: Option<f64>,
        #[arg(long, default_value_t = 11)]
        points: usize,
        /// Emit the coefficient product instead of values.
        #[arg(long)]
        coeffs: bool,
    },
    /// Coefficients of the normalized cap kernel N_d.
    Caps {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        s: f64,
    },
    /// Solve an interpolation problem.
    Interp {
        #[arg(long)]
        kernel: String,
        /// CSV of unit vectors, with the data value in the last column
        /// unless --values is given.
        #[arg(long)]
        centers: PathBuf,
        /// CSV with one data value per line.
        #[arg(long)]
        values: Option<PathBuf>,
        /// Rows are longitude,latitude in degrees (S² only).
        #[arg(long)]
        lonlat: bool,
        /// Points at which to evaluate the interpolant.
        #[arg(long)]
        eval: Option<PathBuf>,
        /// Destination of the evaluation table.
        #[arg(long, requires = "eval")]
        table: Option<PathBuf>,
        /// Destination of the per-center residual table.
        #[arg(long)]
        residuals: Option<PathBuf>,
    },
    /// Generate a point set.
    GenPoints {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = SchemeArg::FibonacciS2)]
        scheme: SchemeArg,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Argument(_) | Error::UnsupportedIndex { .. } => EXIT_INPUT,
            _ => EXIT_NUMERIC,
        };
        let message = match e {
            Error::NotPositiveDefinite { .. } => {
                format!("kernel not positive definite on this point set: {e}")
            }
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

fn input(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: &Cli) -> CmdResult {
    let g = &cli.global;
    match &cli.command {
        Command::Eval {
            kernel,
            points,
            grid,
        } => cmd_eval(g, kernel, *points, *grid),
        Command::Coeffs { kernel } => cmd_coeffs(g, kernel),
        Command::Verify { checks, list } => cmd_verify(g, checks, *list),
        Command::Conv {
            kernel,
            kernel2,
            cap,
            points,
            coeffs,
        } => cmd_conv(
            g,
            kernel.as_deref(),
            kernel2.as_deref(),
            *cap,
            *points,
            *coeffs,
        ),
        Command::Caps { d, s } => cmd_caps(g, *d, *s),
        Command::Interp {
            kernel,
            centers,
            values,
            lonlat,
            eval,
            table,
            residuals,
        } => cmd_interp(
            g,
            kernel,
            centers,
            values.as_deref(),
            *lonlat,
            eval.as_deref(),
            table.as_deref(),
            residuals.as_deref(),
        ),
        Command::GenPoints { d, n, scheme } => cmd_gen_points(g, *d, *n, *scheme),
    }
}

fn emit(path: Option<&Path>, text: &str) -> std::result::Result<(), Failure> {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| input(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure {
                    code: EXIT_NUMERIC,
                    message: format!("cannot write output: {e}"),
                })
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn load_descriptor(arg: &str) -> std::result::Result<KernelDescriptor, Failure> {
    let text = match arg.strip_prefix('@') {
        Some(path) => {
            fs::read_to_string(path).map_err(|e| input(format!("cannot read {path}: {e}")))?
        }
        None => arg.to_string(),
    };
    Ok(KernelDescriptor::from_json(&text)?)
}

/// `--lambda`, `--sphere-dim`, or the natural index of the kernel.
fn resolve_params(
    g: &Global,
    desc: Option<&KernelDescriptor>,
) -> std::result::Result<GegenbauerParams, Failure> {
    if let Some(l) = g.lambda {
        return Ok(GegenbauerParams::new(l)?);
    }
    if let Some(d) = g.sphere_dim {
        return Ok(GegenbauerParams::for_sphere(d)?);
    }
    let natural = match desc {
        Some(KernelDescriptor::CapConv { d, .. }) => Some(f64::from(*d - 1) / 2.0),
        Some(KernelDescriptor::TruncatedPower { m, .. }) => Some(f64::from(*m) - 1.0),
        Some(KernelDescriptor::Montee { m, k, .. }) if m > k => Some(f64::from(*m - 1 - *k)),
        Some(KernelDescriptor::Series {
            lambda: Some(l), ..
        }) => Some(*l),
        _ => None,
    };
    match natural {
        Some(l) => Ok(GegenbauerParams::new(l)?),
        None => Err(input("this command needs --lambda or --sphere-dim")),
    }
}

/// Like [`resolve_params`], but `None` when nothing determines λ.
fn optional_params(
    g: &Global,
    desc: Option<&KernelDescriptor>,
) -> std::result::Result<Option<GegenbauerParams>, Failure> {
    if g.lambda.is_some() || g.sphere_dim.is_some() {
        return resolve_params(g, desc).map(Some);
    }
    Ok(resolve_params(g, desc).ok())
}

fn build(
    desc: &KernelDescriptor,
    params: Option<GegenbauerParams>,
) -> std::result::Result<Kernel, Failure> {
    Ok(desc.build(params)?)
}

fn eval_grid(points: usize, kind: GridKind) -> Vec<f64> {
    if points == 0 {
        return Vec::new();
    }
    if points == 1 {
        return vec![1.0];
    }
    let last = (points - 1) as f64;
    let mut xs: Vec<f64> = (0..points)
        .map(|i| match kind {
            GridKind::X => -1.0 + 2.0 * i as f64 / last,
            GridKind::Theta => (std::f64::consts::PI * (1.0 - i as f64 / last)).cos(),
        })
        .collect();
    xs[0] = -1.0;
    xs[points - 1] = 1.0;
    xs
}

#[derive(Serialize)]
struct Row {
    x: f64,
    theta: f64,
    value: f64,
}

fn cmd_eval(g: &Global, kernel: &str, points: usize, grid: GridKind) -> CmdResult {
    let desc = load_descriptor(kernel)?;
    let params = optional_params(g, Some(&desc))?;
    let k = build(&desc, params)?;
    let rows: Vec<Row> = eval_grid(points, grid)
        .into_iter()
        .map(|x| Row {
            x,
            theta: x.acos(),
            value: k.eval(x),
        })
        .collect();
    if let Some(bad) = rows.iter().find(|r| !r.value.is_finite()) {
        return Err(Error::Evaluation { x: bad.x }.into());
    }
    let text = match g.format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = String::from("x,theta,value\n");
            for r in &rows {
                let _ = writeln!(s, "{},{},{}", num(r.x), num(r.theta), num(r.value));
            }
            s
        }
    };
    emit(g.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn coefficient_table(params: GegenbauerParams, coeffs: &[f64], format: Format) -> String {
    match format {
        Format::Json => {
            to_json(&serde_json::json!({ "lambda": params.lambda(), "coeffs": coeffs }))
        }
        Format::Csv => {
            let mut s = format!(
                "# lambda = {}; coeff = w_lambda(n) * fhat_lambda(n), the coefficient of W^lambda_n = C^lambda_n / C^lambda_n(1)\n",
                params.lambda()
            );
            s.push_str("n,coeff\n");
            for (n, c) in coeffs.iter().enumerate() {
                let _ = writeln!(s, "{n},{}", num(*c));
            }
            s
        }
    }
}

fn cmd_coeffs(g: &Global, kernel: &str) -> CmdResult {
    let desc = load_descriptor(kernel)?;
    let params = resolve_params(g, Some(&desc))?;
    let k = build(&desc, Some(params))?;
    let t = fourier_transform(k.as_ref(), params, g.trunc, g.quad_order)?;
    emit(
        g.out.as_deref(),
        &coefficient_table(params, &t.expansion_coeffs(), g.format),
    )?;
    Ok(EXIT_OK)
}

fn cmd_verify(g: &Global, checks: &[String], list: bool) -> CmdResult {
    if list {
        let names = crate::checks::check_names().join("\n");
        emit(g.out.as_deref(), &format!("{names}\n"))?;
        return Ok(EXIT_OK);
    }
    let report = run_checks(checks, g.tol)?;
    emit(g.out.as_deref(), &to_json(&report))?;
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "check {} failed: deviation {:e} > tolerance {:e}",
            c.name, c.max_deviation, c.tolerance
        );
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY })
}

fn cmd_conv(
    g: &Global,
    kernel: Option<&str>,
    kernel2: Option<&str>,
    cap: Option<f64>,
    points: usize,
    coeffs: bool,
) -> CmdResult {
    let (f, second, desc) = match cap {
        Some(c) => {
            let k: Kernel = Arc::new(CapFunction::new(c)?);
            (Arc::clone(&k), k, None)
        }
        None => {
            let desc =
                load_descriptor(kernel.ok_or_else(|| input("--kernel or --cap is required"))?)?;
            let params = optional_params(g, Some(&desc))?;
            let f = build(&desc, params)?;
            let second = match kernel2 {
                Some(k2) => build(&load_descriptor(k2)?, params)?,
                None => Arc::clone(&f),
            };
            (f, second, Some(desc))
        }
    };
    let params = match (g.lambda, g.sphere_dim) {
        (None, None) if cap.is_some() => {
            return Err(input("conv with --cap needs --lambda or --sphere-dim"))
        }
        _ => resolve_params(g, desc.as_ref())?,
    };
    if coeffs {
        let fh = fourier_transform(f.as_ref(), params, g.trunc, g.quad_order)?;
        let gh = fourier_transform(second.as_ref(), params, g.trunc, g.quad_order)?;
        let prod = conv_lambda_coeffs(&fh, &gh)?;
        emit(
            g.out.as_deref(),
            &coefficient_table(params, &prod.expansion_coeffs(), g.format),
        )?;
        return Ok(EXIT_OK);
    }
    let hop = HopConvolution::new(f, second, params, g.quad_order)?;
    let mut rows = Vec::new();
    for x in eval_grid(points, GridKind::X) {
        rows.push((x, hop.evaluate(x)?));
    }
    let text = match g.format {
        Format::Json => to_json(
            &rows
                .iter()
                .map(|(x, v)| serde_json::json!({ "x": x, "value": v.value, "at_kink": v.at_kink }))
                .collect::<Vec<_>>(),
        ),
        Format::Csv => {
            let mut s = String::from("x,value,at_kink\n");
            for (x, v) in &rows {
                let _ = writeln!(s, "{},{},{}", num(*x), num(v.value), u8::from(v.at_kink));
            }
            s
        }
    };
    emit(g.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn cmd_caps(g: &Global, d: u32, s: f64) -> CmdResult {
    let c = cap_kernel_coefficients(d, s)?;
    let text = match g.format {
        Format::Json => to_json(&c),
        Format::Csv => {
            let mut out = String::from("name,value\n");
            for (name, v) in [
                ("a", c.a),
                ("ab", c.ab),
                ("ad", c.ad),
                ("ae", c.ae),
                ("af", c.af),
                ("ah", c.ah),
                ("b", c.b),
                ("d", c.d),
                ("e", c.e),
                ("f", c.f),
                ("h", c.h),
            ] {
                let _ = writeln!(out, "{name},{}", num(v));
            }
            out
        }
    };
    emit(g.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

/// Numeric CSV rows; a first line that does not parse is taken as a header.
fn read_rows(path: &Path) -> std::result::Result<Vec<Vec<f64>>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if rows.is_empty() && i == 0 => continue,
            Err(e) => return Err(input(format!("{}:{}: {e}", path.display(), i + 1))),
        }
    }
    Ok(rows)
}

fn to_points(
    rows: &[Vec<f64>],
    lonlat: bool,
    with_values: bool,
) -> std::result::Result<(PointSet, Vec<f64>), Failure> {
    if rows.is_empty() {
        return Err(input("no points given"));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(input("rows have differing column counts"));
    }
    let coords = if with_values { width - 1 } else { width };
    if coords == 0 {
        return Err(input("rows have no coordinate columns"));
    }
    let values: Vec<f64> = if with_values {
        rows.iter().map(|r| r[width - 1]).collect()
    } else {
        Vec::new()
    };
    let pts = if lonlat {
        if coords != 2 {
            return Err(input("lon/lat rows need exactly two coordinate columns"));
        }
        PointSet::from_lonlat(&rows.iter().map(|r| (r[0], r[1])).collect::<Vec<_>>())?
    } else {
        PointSet::new(
            coords - 1,
            rows.iter().map(|r| r[..coords].to_vec()).collect(),
        )?
    };
    Ok((pts, values))
}

#[allow(clippy::too_many_arguments)]
fn cmd_interp(
    g: &Global,
    kernel: &str,
    centers: &Path,
    values: Option<&Path>,
    lonlat: bool,
    eval: Option<&Path>,
    table: Option<&Path>,
    residuals: Option<&Path>,
) -> CmdResult {
    let desc = load_descriptor(kernel)?;
    let params = optional_params(g, Some(&desc))?;
    let k = build(&desc, params)?;
    let rows = read_rows(centers)?;
    let (pts, mut data) = to_points(&rows, lonlat, values.is_none())?;
    if let Some(vpath) = values {
        data = read_rows(vpath)?
            .into_iter()
            .map(|r| {
                if r.len() == 1 {
                    Ok(r[0])
                } else {
                    Err(input("values file must have one column"))
                }
            })
            .collect::<std::result::Result<_, _>>()?;
        if data.len() != pts.len() {
            return Err(input(format!(
                "{} values for {} points",
                data.len(),
                pts.len()
            )));
        }
    }
    let itp: Interpolant = solve_interpolation(&pts, &data, k)?;
    emit(g.out.as_deref(), &format!("{}\n", itp.to_json()?))?;
    if let Some(path) = residuals {
        let mut s = String::from("index,value,interpolant,residual\n");
        for (i, (p, v)) in pts.points().iter().zip(&data).enumerate() {
            let fitted = itp.evaluate(p)?;
            let _ = writeln!(
                s,
                "{i},{},{},{}",
                num(*v),
                num(fitted),
                num((fitted - v).abs())
            );
        }
        emit(Some(path), &s)?;
    }
    if let Some(epath) = eval {
        let (tpts, _) = to_points(&read_rows(epath)?, lonlat, false)?;
        let dim = tpts.dim() + 1;
        let mut s = (0..dim)
            .map(|i| format!("x{i}"))
            .collect::<Vec<_>>()
            .join(",");
        s.push_str(",value\n");
        for p in tpts.points() {
            let v = itp.evaluate(p)?;
            let coords: Vec<String> = p.iter().map(|c| num(*c)).collect();
            let _ = writeln!(s, "{},{}", coords.join(","), num(v));
        }
        match table {
            Some(t) => emit(Some(t), &s)?,
            None => eprint!("{s}"),
        }
    }
    Ok(EXIT_OK)
}

fn cmd_gen_points(g: &Global, d: usize, n: usize, scheme: SchemeArg) -> CmdResult {
    let scheme = match scheme {
        SchemeArg::RandomSeeded => PointScheme::RandomSeeded,
        SchemeArg::FibonacciS2 => PointScheme::FibonacciS2,
    };
    let pts = generate_points(d, n, scheme, g.seed)?;
    let text = match g.format {
        Format::Json => to_json(&serde_json::json!({ "d": d, "points": pts.points() })),
        Format::Csv => {
            let mut s = (0..=d)
                .map(|i| format!("x{i}"))
                .collect::<Vec<_>>()
                .join(",");
            s.push('\n');
            for p in pts.points() {
                s.push_str(&p.iter().map(|c| num(*c)).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            s
        }
    };
    emit(g.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}
