//! Gegenbauer (ultraspherical) polynomials and the normalizations used for
//! zonal expansions on the sphere `S^d`, `d = 2λ + 1`.
//!
//! For `λ = 0` the family is the limit `C^0_n = lim λ⁻¹ C^λ_n`, that is
//! `(2/n) T_n` for `n > 0` and `1` for `n = 0`. That branch is evaluated
//! directly through the Chebyshev recurrence.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{argument, Error, Result};

/// How far outside `[-1, 1]` an abscissa may drift before it is rejected.
pub const CLAMP_SLACK: f64 = 1e-12;

/// Below this degree `C^λ_n(1)` is formed as a running product, above it
/// through log-gamma.
const PRODUCT_DEGREE_LIMIT: usize = 64;

/// Gegenbauer index `λ ≥ 0`, tied to the sphere `S^d` by `λ = (d - 1)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct GegenbauerParams {
    lambda: f64,
}

impl GegenbauerParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return argument(format!(
                "Gegenbauer index must be finite and >= 0, got {lambda}"
            ));
        }
        Ok(Self { lambda })
    }

    /// Index for the sphere `S^d`.
    pub fn for_sphere(d: u32) -> Result<Self> {
        if d == 0 {
            return argument("sphere dimension must be at least 1");
        }
        Self::new((f64::from(d) - 1.0) / 2.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_zero(&self) -> bool {
        self.lambda == 0.0
    }

    /// `d = 2λ + 1` when `λ` is a half-integer, otherwise `None`.
    pub fn sphere_dim(&self) -> Option<u32> {
        let d = 2.0 * self.lambda + 1.0;
        (d.fract() == 0.0 && d < f64::from(u32::MAX)).then_some(d as u32)
    }

    /// The index one sphere-step up (`S^d -> S^{d+2}`).
    pub fn raised(&self) -> Self {
        Self {
            lambda: self.lambda + 1.0,
        }
    }

    /// The index one sphere-step down; fails below zero.
    pub fn lowered(&self) -> Result<Self> {
        Self::new(self.lambda - 1.0)
    }
}

impl TryFrom<f64> for GegenbauerParams {
    type Error = Error;

    fn try_from(lambda: f64) -> Result<Self> {
        Self::new(lambda)
    }
}

impl From<GegenbauerParams> for f64 {
    fn from(p: GegenbauerParams) -> f64 {
        p.lambda
    }
}

/// Accept `x` in `[-1, 1]`, snapping values within [`CLAMP_SLACK`] of the
/// interval onto it.
pub fn clamp_unit(x: f64) -> Result<f64> {
    if x.is_nan() {
        return argument("abscissa is NaN");
    }
    if x.abs() <= 1.0 {
        Ok(x)
    } else if x.abs() <= 1.0 + CLAMP_SLACK {
        Ok(x.signum())
    } else {
        argument(format!("abscissa {x} lies outside [-1, 1]"))
    }
}

/// Infallible clamp used inside kernel evaluators, where inputs have
/// already been validated.
#[inline]
pub(crate) fn snap_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// `C^λ_n(x)` by the three-term recurrence.
pub fn eval(params: GegenbauerParams, n: usize, x: f64) -> Result<f64> {
    let x = clamp_unit(x)?;
    Ok(eval_unchecked(params, n, x))
}

pub(crate) fn eval_unchecked(params: GegenbauerParams, n: usize, x: f64) -> f64 {
    let lambda = params.lambda;
    if n == 0 {
        return 1.0;
    }
    if lambda == 0.0 {
        return 2.0 * chebyshev_t(n, x) / n as f64;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * lambda * x;
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 * (kf + lambda) * x * cur - (kf + 2.0 * lambda - 1.0) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn chebyshev_t(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `(C^λ_n(x), d/dx C^λ_n(x))` from the recurrence and its derivative.
pub fn eval_with_derivative(params: GegenbauerParams, n: usize, x: f64) -> Result<(f64, f64)> {
    let x = clamp_unit(x)?;
    let lambda = params.lambda;
    if n == 0 {
        return Ok((1.0, 0.0));
    }
    if lambda == 0.0 {
        let (mut p, mut dp) = (1.0, 0.0);
        let (mut c, mut dc) = (x, 1.0);
        for _ in 1..n {
            let next = 2.0 * x * c - p;
            let dnext = 2.0 * c + 2.0 * x * dc - dp;
            p = c;
            dp = dc;
            c = next;
            dc = dnext;
        }
        let scale = 2.0 / n as f64;
        return Ok((scale * c, scale * dc));
    }
    let (mut p, mut dp) = (1.0, 0.0);
    let (mut c, mut dc) = (2.0 * lambda * x, 2.0 * lambda);
    for k in 1..n {
        let kf = k as f64;
        let a = 2.0 * (kf + lambda);
        let b = kf + 2.0 * lambda - 1.0;
        let next = (a * x * c - b * p) / (kf + 1.0);
        let dnext = (a * (c + x * dc) - b * dp) / (kf + 1.0);
        p = c;
        dp = dc;
        c = next;
        dc = dnext;
    }
    Ok((c, dc))
}

/// All of `C^λ_0(x), …, C^λ_{n_max}(x)` written into `out`.
pub(crate) fn eval_all_into(params: GegenbauerParams, n_max: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.reserve(n_max + 1);
    let lambda = params.lambda;
    out.push(1.0);
    if n_max == 0 {
        return;
    }
    if lambda == 0.0 {
        let (mut prev, mut cur) = (1.0, x);
        out.push(2.0 * cur);
        for k in 1..n_max {
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
            out.push(2.0 * cur / (k + 1) as f64);
        }
        return;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * lambda * x;
    out.push(cur);
    for k in 1..n_max {
        let kf = k as f64;
        let next = (2.0 * (kf + lambda) * x * cur - (kf + 2.0 * lambda - 1.0) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        out.push(cur);
    }
}

/// `C^λ_n(1) = binom(n + 2λ - 1, n)`, with `2/n` on the `λ = 0` branch.
pub fn at_one(params: GegenbauerParams, n: usize) -> f64 {
    let lambda = params.lambda;
    if n == 0 {
        return 1.0;
    }
    if lambda == 0.0 {
        return 2.0 / n as f64;
    }
    if n <= PRODUCT_DEGREE_LIMIT {
        (1..=n).fold(1.0, |acc, j| {
            acc * (j as f64 + 2.0 * lambda - 1.0) / j as f64
        })
    } else {
        let nf = n as f64;
        (ln_gamma(nf + 2.0 * lambda) - ln_gamma(2.0 * lambda) - ln_gamma(nf + 1.0)).exp()
    }
}

/// Normalized polynomial `W^λ_n = C^λ_n / C^λ_n(1)`, equal to one at `x = 1`.
pub fn normalized(params: GegenbauerParams, n: usize, x: f64) -> Result<f64> {
    Ok(eval(params, n, x)? / at_one(params, n))
}

/// `h^λ_n = ∫ (C^λ_n)² (1 - x²)^{λ - 1/2} dx` for `λ > 0`.
pub fn norm_h(params: GegenbauerParams, n: usize) -> Result<f64> {
    let lambda = params.lambda;
    if lambda == 0.0 {
        return Err(Error::UnsupportedIndex {
            lambda,
            hint: "the lambda = 0 family is normalized through weight_w",
        });
    }
    let nf = n as f64;
    let ln_h = PI.ln() + ln_gamma(nf + 2.0 * lambda)
        - (2.0 * lambda - 1.0) * std::f64::consts::LN_2
        - ln_gamma(nf + 1.0)
        - (nf + lambda).ln()
        - 2.0 * ln_gamma(lambda);
    Ok(ln_h.exp())
}

/// Expansion weight `w_λ(n)`, the reciprocal of `∫ (W^λ_n)² dΩ_λ`.
pub fn weight_w(params: GegenbauerParams, n: usize) -> f64 {
    let lambda = params.lambda;
    if lambda == 0.0 {
        return if n == 0 { 1.0 / PI } else { 2.0 / PI };
    }
    let nf = n as f64;
    let ln_w = ln_gamma(lambda) + (nf + lambda).ln() + ln_gamma(nf + 2.0 * lambda)
        - 0.5 * PI.ln()
        - ln_gamma(lambda + 0.5)
        - ln_gamma(2.0 * lambda)
        - ln_gamma(nf + 1.0);
    ln_w.exp()
}

/// Total mass `∫ dΩ_λ = √π Γ(λ + 1/2) / Γ(λ + 1)`.
pub fn total_mass(params: GegenbauerParams) -> f64 {
    let lambda = params.lambda;
    (0.5 * PI.ln() + ln_gamma(lambda + 0.5) - ln_gamma(lambda + 1.0)).exp()
}
