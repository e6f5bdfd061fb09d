//! Montée `(I f)(x) = ∫_{-1}^x f` and descente `(D f)(x) = f'(x)`, the
//! operators that move a zonal function between `S^{d+2}` and `S^d`.
//!
//! The numeric images here work on any [`Zonal`] and double as oracles for
//! the closed forms elsewhere in the crate.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{argument, Error, Result};
use crate::gegenbauer::{self, clamp_unit, GegenbauerParams};
use crate::kernel::{GegenbauerKernel, Kernel, Zonal};
use crate::quadrature::{adaptive_with_breaks, panel_breaks};
use crate::transform::{fourier_transform, SeriesCoeffs};

/// Grid used by the operator identity checks.
pub const IDENTITY_GRID: usize = 501;

/// Default absolute tolerance of numeric montée.
pub const DEFAULT_MONTEE_TOL: f64 = 1e-13;

/// Largest step tried by numeric descente.
const MAX_DIFF_STEP: f64 = 0.05;
/// Closer than this to a breakpoint, descente switches to one-sided.
const MIN_CENTRAL_GAP: f64 = 1e-6;
const RICHARDSON_LEVELS: usize = 7;

/// `μ_λ`: `λ` for `λ > 0`, `1` for `λ = 0`.
pub fn mu(params: GegenbauerParams) -> f64 {
    if params.is_zero() {
        1.0
    } else {
        params.lambda()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Montee,
    Descente,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    Numeric,
}

/// A value returned by an operator image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    /// Set when descente fell back to a one-sided difference because `x`
    /// sits on (or next to) a registered breakpoint or an endpoint.
    pub one_sided: bool,
}

#[derive(Debug, Clone)]
enum Image {
    /// `I^k f` through Cauchy's repeated-integration formula.
    Montee {
        times: usize,
    },
    /// `D f` where `f = I g`.
    DescenteExact {
        derivative: Kernel,
    },
    DescenteNumeric,
}

/// The image of a zonal function under `I` or `D`.
#[derive(Debug, Clone)]
pub struct OperatorImage {
    source: Kernel,
    image: Image,
    tol: f64,
}

impl OperatorImage {
    pub fn source(&self) -> &Kernel {
        &self.source
    }

    pub fn op(&self) -> Operator {
        match self.image {
            Image::Montee { .. } => Operator::Montee,
            _ => Operator::Descente,
        }
    }

    pub fn provenance(&self) -> Provenance {
        match self.image {
            Image::DescenteExact { .. } => Provenance::Analytic,
            _ => Provenance::Numeric,
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<Evaluation> {
        let x = clamp_unit(x)?;
        match &self.image {
            Image::Montee { times } => Ok(Evaluation {
                value: repeated_integral(self.source.as_ref(), *times, x, self.tol)?,
                one_sided: false,
            }),
            Image::DescenteExact { derivative } => {
                let on_break = self
                    .source
                    .breakpoints()
                    .iter()
                    .any(|b| (b - x).abs() < 1e-14);
                Ok(Evaluation {
                    value: derivative.eval(x),
                    one_sided: on_break,
                })
            }
            Image::DescenteNumeric => richardson_derivative(self.source.as_ref(), x, self.tol),
        }
    }
}

impl Zonal for OperatorImage {
    fn eval(&self, x: f64) -> f64 {
        self.evaluate(x).map(|e| e.value).unwrap_or(f64::NAN)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.source.breakpoints()
    }

    fn montee_source(&self) -> Option<Kernel> {
        match self.image {
            Image::Montee { times: 1 } => Some(Arc::clone(&self.source)),
            Image::Montee { times } => Some(Arc::new(OperatorImage {
                source: Arc::clone(&self.source),
                image: Image::Montee { times: times - 1 },
                tol: self.tol,
            })),
            _ => None,
        }
    }
}

/// Numeric montée by adaptive quadrature, absolute error `≤ tol`.
pub fn montee_numeric(f: Kernel, tol: f64) -> Result<OperatorImage> {
    montee_numeric_iterated(f, 1, tol)
}

/// `I^k f` as one integral, `(1/(k-1)!) ∫_{-1}^x (x - u)^{k-1} f(u) du`.
pub fn montee_numeric_iterated(f: Kernel, k: usize, tol: f64) -> Result<OperatorImage> {
    if k == 0 {
        return argument("montée count must be at least 1");
    }
    if !(tol > 0.0) {
        return argument("tolerance must be positive");
    }
    Ok(OperatorImage {
        source: f,
        image: Image::Montee { times: k },
        tol,
    })
}

/// Numeric descente. When `f` is known to be `I g` the image is `g`
/// itself; otherwise Richardson-extrapolated differences.
pub fn descente_numeric(f: Kernel, tol: f64) -> Result<OperatorImage> {
    if !(tol > 0.0) {
        return argument("tolerance must be positive");
    }
    let image = match f.montee_source() {
        Some(derivative) => Image::DescenteExact { derivative },
        None => Image::DescenteNumeric,
    };
    Ok(OperatorImage {
        source: f,
        image,
        tol,
    })
}

/// Descente by finite differences even when an exact derivative is known.
pub fn descente_differenced(f: Kernel, tol: f64) -> Result<OperatorImage> {
    if !(tol > 0.0) {
        return argument("tolerance must be positive");
    }
    Ok(OperatorImage {
        source: f,
        image: Image::DescenteNumeric,
        tol,
    })
}

/// `I^k f`, preferring closed-form montée images and falling back to one
/// numeric repeated integral over the deepest closed-form level.
pub fn montee_iterate(f: &Kernel, k: usize, tol: f64) -> Result<Kernel> {
    let mut level = Arc::clone(f);
    let mut done = 0;
    while done < k {
        match level.montee() {
            Some(next) => {
                level = next;
                done += 1;
            }
            None => break,
        }
    }
    if done == k {
        return Ok(level);
    }
    Ok(Arc::new(montee_numeric_iterated(level, k - done, tol)?))
}

fn repeated_integral(f: &dyn Zonal, times: usize, x: f64, tol: f64) -> Result<f64> {
    if x <= -1.0 {
        return Ok(0.0);
    }
    // u = cos φ: zonal functions are smooth in φ, and the Jacobian sin φ
    // absorbs the usual (1 - u^2)^{-1/2} endpoint behaviour of derivatives.
    let theta = x.acos();
    let breaks = panel_breaks(theta, PI, f.breakpoints().into_iter().map(f64::acos));
    let factorial: f64 = (1..times).map(|j| j as f64).product();
    let integrand = |phi: f64| {
        let (s, u) = phi.sin_cos();
        let base = f.eval(u) * s;
        if times == 1 {
            base
        } else {
            (x - u).powi(times as i32 - 1) * base
        }
    };
    let scaled_tol = tol * factorial;
    let r = adaptive_with_breaks(&integrand, &breaks, scaled_tol)?;
    Ok(r.value / factorial)
}

fn richardson_derivative(f: &dyn Zonal, x: f64, tol: f64) -> Result<Evaluation> {
    let theta = x.acos();
    let sin = theta.sin();
    if sin < MIN_CENTRAL_GAP {
        return difference_in_x(f, x, tol);
    }
    // f'(x) = -g'(θ) / sin θ with g(θ) = f(cos θ); smooth in θ up to the poles.
    let g = |t: f64| f.eval(t.cos());
    let mut below = theta;
    let mut above = PI - theta;
    let mut on_break = false;
    for b in f.breakpoints() {
        if (x - b).abs() < 1e-14 {
            on_break = true;
            continue;
        }
        let d = theta - b.acos();
        if d > 0.0 {
            below = below.min(d);
        } else {
            above = above.min(-d);
        }
    }
    let scale = -1.0 / sin;
    let tol = tol * sin;
    let central_gap = below.min(above);
    if !on_break && central_gap >= MIN_CENTRAL_GAP {
        let h0 = MAX_DIFF_STEP.min(0.5 * central_gap);
        let q = extrapolate(h0, 2, tol, |h| (g(theta + h) - g(theta - h)) / (2.0 * h));
        return finite(scale * q, x, false);
    }
    // right derivative in x (decreasing θ) on a breakpoint, otherwise away
    // from the nearby one
    let toward_pole = if on_break {
        below > 0.0
    } else {
        below >= above
    };
    let (dir, gap) = if toward_pole {
        (-1.0, below)
    } else {
        (1.0, above)
    };
    let h0 = MAX_DIFF_STEP.min(0.5 * gap);
    let gt = g(theta);
    let q = extrapolate(h0, 1, tol, |h| (g(theta + dir * h) - gt) / (dir * h));
    finite(scale * q, x, true)
}

/// One-sided differences in `x`, used at the endpoints.
fn difference_in_x(f: &dyn Zonal, x: f64, tol: f64) -> Result<Evaluation> {
    let dir = if x > 0.0 { -1.0 } else { 1.0 };
    let mut gap: f64 = 2.0;
    for b in f.breakpoints() {
        let d = dir * (b - x);
        if d > 1e-14 {
            gap = gap.min(d);
        }
    }
    let h0 = MAX_DIFF_STEP.min(0.5 * gap);
    let fx = f.eval(x);
    let value = extrapolate(h0, 1, tol, |h| (f.eval(x + dir * h) - fx) / (dir * h));
    finite(value, x, true)
}

fn finite(value: f64, x: f64, one_sided: bool) -> Result<Evaluation> {
    if value.is_finite() {
        Ok(Evaluation { value, one_sided })
    } else {
        Err(Error::Evaluation { x })
    }
}

/// Richardson extrapolation of a difference quotient whose error expands in
/// powers of `h^step_power`, halving `h` each level.
fn extrapolate(h0: f64, step_power: i32, tol: f64, quotient: impl Fn(f64) -> f64) -> f64 {
    let base = 2f64.powi(step_power);
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(RICHARDSON_LEVELS);
    let mut best = f64::NAN;
    let mut best_change = f64::INFINITY;
    let mut h = h0;
    for i in 0..RICHARDSON_LEVELS {
        let mut row = vec![quotient(h)];
        let mut factor = base;
        for j in 1..=i {
            let prev = row[j - 1];
            row.push(prev + (prev - table[i - 1][j - 1]) / (factor - 1.0));
            factor *= base;
        }
        if i > 0 {
            let change = (row[i] - table[i - 1][i - 1]).abs();
            if change < best_change {
                best_change = change;
                best = row[i];
            }
            if change <= tol {
                return row[i];
            }
        } else {
            best = row[0];
        }
        table.push(row);
        h *= 0.5;
    }
    best
}

/// Largest deviation of `D C^λ_n` (analytic derivative of the recurrence)
/// from `2 μ_λ C^{λ+1}_{n-1}` on a 501-point grid.
pub fn check_descente_on_gegenbauer(params: GegenbauerParams, n: usize) -> Result<f64> {
    if n == 0 {
        return argument("degree must be at least 1");
    }
    let up = params.raised();
    let scale = 2.0 * mu(params);
    grid(IDENTITY_GRID).try_fold(0.0f64, |acc, x| {
        let (_, d) = gegenbauer::eval_with_derivative(params, n, x)?;
        let rhs = scale * gegenbauer::eval(up, n - 1, x)?;
        Ok(acc.max((d - rhs).abs()))
    })
}

/// Largest deviation of numeric `I C^{λ+1}_{n-1}` from
/// `(C^λ_n - C^λ_n(-1)) / (2 μ_λ)` on a 501-point grid.
pub fn check_montee_on_gegenbauer(params: GegenbauerParams, n: usize) -> Result<f64> {
    if n == 0 {
        return argument("degree must be at least 1");
    }
    let up = params.raised();
    let image = montee_numeric(
        Arc::new(GegenbauerKernel::new(up, n - 1)),
        DEFAULT_MONTEE_TOL,
    )?;
    let scale = 1.0 / (2.0 * mu(params));
    let at_minus_one = gegenbauer::eval(params, n, -1.0)?;
    grid(IDENTITY_GRID).try_fold(0.0f64, |acc, x| {
        let lhs = image.evaluate(x)?.value;
        let rhs = scale * (gegenbauer::eval(params, n, x)? - at_minus_one);
        Ok(acc.max((lhs - rhs).abs()))
    })
}

/// Coefficients of `f'` against `C^{λ+1}_n` from those of `f` against
/// `C^λ_n`: `b_{n-1} = 2 μ_λ a_n`.
pub fn coeff_map_derivative(a: &SeriesCoeffs) -> Result<SeriesCoeffs> {
    let params = a.params();
    let up = params.raised();
    let src = a.gegenbauer_coeffs();
    if src.len() == 1 {
        return Ok(SeriesCoeffs::zeros(up, 0));
    }
    let scale = 2.0 * mu(params);
    let b: Vec<f64> = src[1..].iter().map(|an| scale * an).collect();
    SeriesCoeffs::from_gegenbauer(up, &b)
}

/// Inverse map: coefficients of `I f` at `λ` from those of `f` at `λ + 1`.
/// The `n = 0` entry is fixed by `(I f)(-1) = 0` and so is not determined
/// here; it is returned as zero.
pub fn coeff_map_montee(b: &SeriesCoeffs) -> Result<SeriesCoeffs> {
    let params = b.params().lowered()?;
    let scale = 1.0 / (2.0 * mu(params));
    let mut a = vec![0.0];
    a.extend(b.gegenbauer_coeffs().iter().map(|bn| scale * bn));
    SeriesCoeffs::from_gegenbauer(params, &a)
}

/// Smallest constant `C ≥ 0` with a nonnegative constant coefficient in
/// `C + I f`, where `f` lives at `λ + 1` and `I f` is expanded at `λ`.
/// Higher coefficients of `I f` inherit the signs of those of `f`, so only
/// the constant term can fall short.
pub fn montee_offset(f: Kernel, params: GegenbauerParams, order: usize) -> Result<f64> {
    let image = montee_iterate(&f, 1, DEFAULT_MONTEE_TOL)?;
    let b = fourier_transform(image.as_ref(), params, 0, order)?;
    Ok((-b.gegenbauer_coeffs()[0]).max(0.0))
}

/// `n` equispaced points on `[-1, 1]`, endpoints included.
pub fn grid(n: usize) -> impl Iterator<Item = f64> + Clone {
    let last = n.saturating_sub(1).max(1) as f64;
    (0..n).map(move |i| {
        if n == 1 {
            0.0
        } else {
            -1.0 + 2.0 * i as f64 / last
        }
    })
}
