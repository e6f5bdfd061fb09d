//! Fourier–Gegenbauer coefficients `f̂_λ(n) = ∫ f W^λ_n dΩ_λ` and the
//! reconstruction `f ~ Σ w_λ(n) f̂_λ(n) W^λ_n`.
//!
//! Coefficients are integrated in the angle variable, `x = cos θ`,
//! `dΩ_λ = sin^{2λ} θ dθ`, with Gauss–Legendre panels split at the kernel's
//! breakpoints. Kernels built from `θ` (truncated powers, cap kernels) are
//! smooth on every such panel even where they are not smooth in `x`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::gegenbauer::{self, snap_unit, GegenbauerParams};
use crate::kernel::{breakpoint_angles, Zonal};
use crate::quadrature::{gauss_legendre, legendre_on, panel_breaks};

/// Truncated vector of Fourier–Gegenbauer coefficients `f̂_λ(0..=N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSeries", into = "RawSeries")]
pub struct SeriesCoeffs {
    params: GegenbauerParams,
    coeffs: Vec<f64>,
    /// Coefficients against `C^λ_n`, cached for evaluation.
    gegenbauer: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSeries {
    lambda: f64,
    coeffs: Vec<f64>,
}

impl TryFrom<RawSeries> for SeriesCoeffs {
    type Error = Error;

    fn try_from(raw: RawSeries) -> Result<Self> {
        SeriesCoeffs::new(GegenbauerParams::new(raw.lambda)?, raw.coeffs)
    }
}

impl From<SeriesCoeffs> for RawSeries {
    fn from(s: SeriesCoeffs) -> Self {
        RawSeries {
            lambda: s.params.lambda(),
            coeffs: s.coeffs,
        }
    }
}

impl SeriesCoeffs {
    /// From transform values `f̂_λ(n)`.
    pub fn new(params: GegenbauerParams, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return argument("a coefficient vector needs at least the n = 0 entry");
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return argument("coefficients must be finite");
        }
        let gegenbauer = coeffs
            .iter()
            .enumerate()
            .map(|(n, &c)| gegenbauer::weight_w(params, n) * c / gegenbauer::at_one(params, n))
            .collect();
        Ok(Self {
            params,
            coeffs,
            gegenbauer,
        })
    }

    pub fn zeros(params: GegenbauerParams, truncation: usize) -> Self {
        Self::new(params, vec![0.0; truncation + 1]).expect("zero vector is valid")
    }

    /// From coefficients `a_n` of `f = Σ a_n C^λ_n`.
    pub fn from_gegenbauer(params: GegenbauerParams, a: &[f64]) -> Result<Self> {
        let coeffs = a
            .iter()
            .enumerate()
            .map(|(n, &an)| an * gegenbauer::at_one(params, n) / gegenbauer::weight_w(params, n))
            .collect();
        Self::new(params, coeffs)
    }

    /// From coefficients `c_n` of `f = Σ c_n W^λ_n`.
    pub fn from_expansion(params: GegenbauerParams, c: &[f64]) -> Result<Self> {
        let coeffs = c
            .iter()
            .enumerate()
            .map(|(n, &cn)| cn / gegenbauer::weight_w(params, n))
            .collect();
        Self::new(params, coeffs)
    }

    pub fn params(&self) -> GegenbauerParams {
        self.params
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `f̂_λ(n)` for `n = 0..=N`.
    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficients against `C^λ_n`.
    pub fn gegenbauer_coeffs(&self) -> &[f64] {
        &self.gegenbauer
    }

    /// Coefficients against `W^λ_n`, `w_λ(n) f̂_λ(n)`.
    pub fn expansion_coeffs(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, &c)| gegenbauer::weight_w(self.params, n) * c)
            .collect()
    }

    /// Partial sum `Σ_{n ≤ N} w_λ(n) f̂_λ(n) W^λ_n(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let x = gegenbauer::clamp_unit(x)?;
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: f64) -> f64 {
        let mut c = Vec::new();
        gegenbauer::eval_all_into(self.params, self.truncation(), x, &mut c);
        c.iter().zip(&self.gegenbauer).map(|(p, a)| p * a).sum()
    }

    /// Partial sums at `x = 1`, which are monotone when all terms are
    /// nonnegative.
    pub fn partial_sums_at_one(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.expansion_coeffs()
            .into_iter()
            .map(|t| {
                acc += t;
                acc
            })
            .collect()
    }
}

/// Reconstruction of a truncated series as a kernel.
#[derive(Debug, Clone)]
pub struct SeriesKernel(pub SeriesCoeffs);

impl Zonal for SeriesKernel {
    fn eval(&self, x: f64) -> f64 {
        self.0.eval_unchecked(snap_unit(x))
    }
}

/// Coefficients together with a per-entry error estimate.
#[derive(Debug, Clone)]
pub struct TransformEstimate {
    pub coeffs: SeriesCoeffs,
    /// Estimated absolute quadrature error of each coefficient.
    pub errors: Vec<f64>,
}

/// `f̂_λ(n)` for a single degree.
pub fn fourier_coeff(
    f: &dyn Zonal,
    params: GegenbauerParams,
    n: usize,
    order: usize,
) -> Result<f64> {
    let (coeffs, _) = accumulate(f, params, n, order)?;
    Ok(coeffs[n])
}

/// `f̂_λ(0..=n_max)` in one sweep of the quadrature nodes.
pub fn fourier_transform(
    f: &dyn Zonal,
    params: GegenbauerParams,
    n_max: usize,
    order: usize,
) -> Result<SeriesCoeffs> {
    let (coeffs, _) = accumulate(f, params, n_max, order)?;
    SeriesCoeffs::new(params, coeffs)
}

/// Transform at `order` nodes per panel, with errors estimated against a
/// rule half again as large, floored by the rounding level of each sum.
pub fn fourier_transform_estimate(
    f: &dyn Zonal,
    params: GegenbauerParams,
    n_max: usize,
    order: usize,
) -> Result<TransformEstimate> {
    let (coarse, magnitude) = accumulate(f, params, n_max, order)?;
    let (fine, _) = accumulate(f, params, n_max, order + order / 2 + 1)?;
    let errors = coarse
        .iter()
        .zip(&fine)
        .zip(&magnitude)
        .map(|((a, b), m)| (a - b).abs().max(64.0 * f64::EPSILON * m))
        .collect();
    Ok(TransformEstimate {
        coeffs: SeriesCoeffs::new(params, fine)?,
        errors,
    })
}

/// Returns the transform values and `∫ |f W_n| dΩ` (for rounding floors).
fn accumulate(
    f: &dyn Zonal,
    params: GegenbauerParams,
    n_max: usize,
    order: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 {
        return argument("quadrature order must be at least 1");
    }
    let rule = gauss_legendre(order)?;
    let breaks = panel_breaks(0.0, PI, breakpoint_angles(f));
    let lambda = params.lambda();
    let inv_at_one: Vec<f64> = (0..=n_max)
        .map(|n| 1.0 / gegenbauer::at_one(params, n))
        .collect();
    let mut coeffs = vec![0.0; n_max + 1];
    let mut magnitude = vec![0.0; n_max + 1];
    let mut poly = Vec::with_capacity(n_max + 1);
    let mut failure = None;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (&u, &wt) in rule.nodes().iter().zip(rule.weights()) {
            let theta = mid + half * u;
            let x = theta.cos();
            let fx = f.eval(x);
            if !fx.is_finite() {
                failure.get_or_insert(x);
                continue;
            }
            let measure = if lambda == 0.0 {
                1.0
            } else {
                theta.sin().powf(2.0 * lambda)
            };
            let scale = half * wt * measure * fx;
            gegenbauer::eval_all_into(params, n_max, x, &mut poly);
            for n in 0..=n_max {
                let term = scale * poly[n] * inv_at_one[n];
                coeffs[n] += term;
                magnitude[n] += term.abs();
            }
        }
    }
    if let Some(x) = failure {
        return Err(Error::Evaluation { x });
    }
    Ok((coeffs, magnitude))
}

/// Partial sum of a series at `x`.
pub fn series_eval(s: &SeriesCoeffs, x: f64) -> Result<f64> {
    s.eval(x)
}

/// Cesàro (C, 1) smoothing of a truncated series: entry `n` is scaled by
/// `1 - n/(N + 1)`. A numerical de-Gibbs tool only.
pub fn cesaro_smoothed(s: &SeriesCoeffs) -> SeriesCoeffs {
    let len = s.coeffs.len() as f64;
    let coeffs = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| c * (1.0 - n as f64 / len))
        .collect();
    SeriesCoeffs::new(s.params, coeffs).expect("scaled finite coefficients")
}

/// Convenience: `f̂_λ` of a closure `(integrand)` over `[a, b] ⊂ [0, π]` in
/// angle space, used by oracles that integrate over caps.
pub(crate) fn angular_integral(
    params: GegenbauerParams,
    theta_lo: f64,
    theta_hi: f64,
    order: usize,
    g: impl Fn(f64) -> f64,
) -> Result<f64> {
    let rule = gauss_legendre(order)?;
    let lambda = params.lambda();
    Ok(legendre_on(&rule, theta_lo, theta_hi, |theta| {
        let measure = if lambda == 0.0 {
            1.0
        } else {
            theta.sin().powf(2.0 * lambda)
        };
        measure * g(theta.cos())
    }))
}
