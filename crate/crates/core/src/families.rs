//! Closed-form kernel families.
//!
//! * truncated powers `f_m(cos θ) = (t - θ)^m_+`, strictly positive definite
//!   on `S^{2m-1}` for `2 ≤ m ≤ 4`;
//! * their montée iterates, with printed closed forms for `I f_2`, `I f_3`,
//!   `I² f_3`, `I f_4`, `I² f_4` and a two-step recurrence for `I f_m`;
//! * the normalized cap self-convolutions `N_3`, `N_5`, `N_7`, `N_9`,
//!   supported on `x > cos 2s`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::descriptor::KernelDescriptor;
use crate::dimension_ops::{montee_numeric_iterated, DEFAULT_MONTEE_TOL};
use crate::error::{argument, Result};
use crate::gegenbauer::{clamp_unit, snap_unit};
use crate::kernel::{Kernel, Zonal};

fn check_support_angle(t: f64) -> Result<()> {
    if !(t > 0.0 && t < PI) {
        return argument(format!("support angle t must lie in (0, π), got {t}"));
    }
    Ok(())
}

/// `u^m_+`, with `u^0_+` the indicator of `u > 0`.
#[inline]
fn positive_power(u: f64, m: u32) -> f64 {
    if u > 0.0 {
        u.powi(m as i32)
    } else {
        0.0
    }
}

/// `f_m(cos θ) = (t - θ)^m_+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedPower {
    pub m: u32,
    pub t: f64,
}

impl TruncatedPower {
    pub fn new(m: u32, t: f64) -> Result<Self> {
        if m == 0 {
            return argument("truncated power exponent must be at least 1");
        }
        check_support_angle(t)?;
        Ok(Self { m, t })
    }
}

impl Zonal for TruncatedPower {
    fn eval(&self, x: f64) -> f64 {
        positive_power(self.t - snap_unit(x).acos(), self.m)
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.t.cos()]
    }

    fn montee(&self) -> Option<Kernel> {
        MonteeIterate::new(self.m, 1, self.t)
            .ok()
            .map(|k| Arc::new(k) as Kernel)
    }

    fn descriptor(&self) -> Option<KernelDescriptor> {
        Some(KernelDescriptor::TruncatedPower {
            m: self.m,
            t: self.t,
        })
    }
}

/// `(t - arccos x)^m_+`.
pub fn eval_truncated_power(k: &TruncatedPower, x: f64) -> Result<f64> {
    Ok(k.eval(clamp_unit(x)?))
}

/// The montée iterates with printed closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MonteeFamily {
    If2,
    If3,
    I2f3,
    If4,
    I2f4,
}

impl MonteeFamily {
    /// The closed form of `I^k f_m`, if one is printed.
    pub fn lookup(m: u32, k: u32) -> Option<Self> {
        match (m, k) {
            (2, 1) => Some(Self::If2),
            (3, 1) => Some(Self::If3),
            (3, 2) => Some(Self::I2f3),
            (4, 1) => Some(Self::If4),
            (4, 2) => Some(Self::I2f4),
            _ => None,
        }
    }

    pub fn exponent(self) -> u32 {
        match self {
            Self::If2 => 2,
            Self::If3 | Self::I2f3 => 3,
            Self::If4 | Self::I2f4 => 4,
        }
    }

    pub fn montee_count(self) -> u32 {
        match self {
            Self::I2f3 | Self::I2f4 => 2,
            _ => 1,
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "If2" => Ok(Self::If2),
            "If3" => Ok(Self::If3),
            "I2f3" => Ok(Self::I2f3),
            "If4" => Ok(Self::If4),
            "I2f4" => Ok(Self::I2f4),
            other => argument(format!("unknown montée family tag {other:?}")),
        }
    }

    /// Value at angle `θ` for support angle `t`; zero for `θ ≥ t`.
    fn eval_angle(self, t: f64, theta: f64) -> f64 {
        if theta >= t {
            return 0.0;
        }
        let u = t - theta;
        let (c, s) = (theta.cos(), theta.sin());
        match self {
            Self::If2 => c * (u * u - 2.0) + 2.0 * s * u + 2.0 * t.cos(),
            Self::If3 => c * (u * u * u - 6.0 * u) + s * (3.0 * u * u - 6.0) + 6.0 * t.sin(),
            Self::If4 => {
                let u2 = u * u;
                c * (u2 * u2 - 12.0 * u2 + 24.0) + s * (4.0 * u2 * u - 24.0 * u) - 24.0 * t.cos()
            }
            Self::I2f3 => {
                let (a7, a6, a5, a4) = (0.25, -21.0 / 8.0, 9.0 / 8.0, -45.0 / 16.0);
                let a3 = 6.0 * t.sin();
                let (a2, a1) = (0.5, -3.0);
                let a0 = -3.0 / 16.0 * (2.0 * t).sin();
                let u2 = u * u;
                (2.0 * theta).cos() * (a7 * u2 * u + a6 * u)
                    + (2.0 * theta).sin() * (a5 * u2 + a4)
                    + c * a3
                    + a2 * u2 * u
                    + a1 * u
                    + a0
            }
            Self::I2f4 => {
                let (b8, b7, b6, b5, b4) = (0.25, -21.0 / 4.0, 93.0 / 8.0, 1.5, -45.0 / 4.0);
                let ct = t.cos();
                let b3 = -24.0 * ct;
                let (b2, b1) = (0.5, -6.0);
                let b0 = 0.75 * ct * ct + 93.0 / 8.0;
                let u2 = u * u;
                (2.0 * theta).cos() * (b8 * u2 * u2 + b7 * u2 + b6)
                    + (2.0 * theta).sin() * (b5 * u2 * u + b4 * u)
                    + c * b3
                    + (b2 * u2 * u2 + b1 * u2 + b0)
            }
        }
    }
}

/// Evaluate one of the printed closed forms at `x`.
pub fn eval_montee_closed_form(which: MonteeFamily, t: f64, x: f64) -> Result<f64> {
    check_support_angle(t)?;
    Ok(which.eval_angle(t, clamp_unit(x)?.acos()))
}

/// Below this distance `u = t - θ` from the knot the recurrence loses
/// everything to cancellation and the power series is used instead.
const SERIES_RADIUS: f64 = 1.0;

/// `(I f_m)(cos θ)` through
/// `I f_m = cos θ u^m_+ + m sin θ u^{m-1}_+ - m(m-1) I f_{m-2}`,
/// started from the closed forms of `I f_1` and `I f_2`.
fn montee_recurrence_angle(m: u32, t: f64, theta: f64) -> f64 {
    if theta >= t {
        return 0.0;
    }
    let u = t - theta;
    if u <= SERIES_RADIUS {
        return montee_series_angle(m, t, u);
    }
    let (c, s) = (theta.cos(), theta.sin());
    let mut value = if m % 2 == 1 {
        c * u + s - t.sin()
    } else {
        c * u * u + 2.0 * s * u - 2.0 * (c - t.cos())
    };
    let mut k = if m % 2 == 1 { 1 } else { 2 };
    while k < m {
        k += 2;
        let kf = f64::from(k);
        value =
            c * positive_power(u, k) + kf * s * positive_power(u, k - 1) - kf * (kf - 1.0) * value;
    }
    value
}

/// `∫_0^u s^m sin(t - s) ds = Σ_j u^{m+1+j} sin(t - jπ/2) / (j! (m+1+j))`.
fn montee_series_angle(m: u32, t: f64, u: f64) -> f64 {
    let (st, ct) = t.sin_cos();
    let cycle = [st, -ct, -st, ct];
    let mf = f64::from(m);
    let mut power = u.powi(m as i32 + 1);
    let mut sum = 0.0;
    for j in 0..64 {
        let jf = j as f64;
        let term = power / (mf + 1.0 + jf) * cycle[j % 4];
        sum += term;
        if power < 1e-18 * sum.abs() && j >= 2 {
            break;
        }
        power *= u / (jf + 1.0);
    }
    sum
}

/// `I f_m` by the recurrence. Only a single montée (`k = 1`) has a
/// recurrence; higher iterates go through [`MonteeIterate`].
pub fn eval_montee_recurrence(m: u32, t: f64, k: u32, x: f64) -> Result<f64> {
    if m == 0 {
        return argument("exponent m must be at least 1");
    }
    if k != 1 {
        return argument(format!("the recurrence covers one montée, got k = {k}"));
    }
    check_support_angle(t)?;
    Ok(montee_recurrence_angle(m, t, clamp_unit(x)?.acos()))
}

/// `I^k f_m` as a kernel: closed form where printed, the recurrence for
/// `k = 1`, otherwise numeric montée over the deepest closed level.
#[derive(Debug, Clone)]
pub struct MonteeIterate {
    pub m: u32,
    pub k: u32,
    pub t: f64,
    numeric: Option<Kernel>,
}

impl MonteeIterate {
    pub fn new(m: u32, k: u32, t: f64) -> Result<Self> {
        if m == 0 || k == 0 {
            return argument("montée iterate needs m >= 1 and k >= 1");
        }
        check_support_angle(t)?;
        let numeric = if k == 1 || MonteeFamily::lookup(m, k).is_some() {
            None
        } else {
            let closed_level = (1..k)
                .rev()
                .find(|&j| j == 1 || MonteeFamily::lookup(m, j).is_some())
                .unwrap_or(1);
            let base: Kernel = Arc::new(MonteeIterate::new(m, closed_level, t)?);
            Some(Arc::new(montee_numeric_iterated(
                base,
                (k - closed_level) as usize,
                DEFAULT_MONTEE_TOL,
            )?) as Kernel)
        };
        Ok(Self { m, k, t, numeric })
    }

    /// Evaluation route, for reporting.
    pub fn provenance(&self) -> &'static str {
        if MonteeFamily::lookup(self.m, self.k).is_some() {
            "closed_form"
        } else if self.k == 1 {
            "recurrence"
        } else {
            "numeric"
        }
    }
}

impl Zonal for MonteeIterate {
    fn eval(&self, x: f64) -> f64 {
        if let Some(n) = &self.numeric {
            return n.eval(x);
        }
        let theta = snap_unit(x).acos();
        match MonteeFamily::lookup(self.m, self.k) {
            Some(family) => family.eval_angle(self.t, theta),
            None => montee_recurrence_angle(self.m, self.t, theta),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.t.cos()]
    }

    fn montee_source(&self) -> Option<Kernel> {
        if self.k == 1 {
            Some(Arc::new(TruncatedPower {
                m: self.m,
                t: self.t,
            }))
        } else {
            MonteeIterate::new(self.m, self.k - 1, self.t)
                .ok()
                .map(|k| Arc::new(k) as Kernel)
        }
    }

    fn montee(&self) -> Option<Kernel> {
        MonteeFamily::lookup(self.m, self.k + 1)?;
        MonteeIterate::new(self.m, self.k + 1, self.t)
            .ok()
            .map(|k| Arc::new(k) as Kernel)
    }

    fn descriptor(&self) -> Option<KernelDescriptor> {
        Some(KernelDescriptor::Montee {
            m: self.m,
            k: self.k,
            t: self.t,
        })
    }
}

/// Normalization and shape coefficients of `N_d`.
///
/// `N_d(x) = 1 + b arccos x + sqrt((1-x)/(1+x)) (d + e/v + f/v² + h/v³)`,
/// `v = 1 + x`, on `cos 2s < x ≤ 1`. The products `ab, ad, …` are the
/// primary data; the shape coefficients are those products divided by
/// `a = (g ⋆ g)(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapCoefficients {
    pub sphere_dim: u32,
    pub s: f64,
    pub a: f64,
    pub ab: f64,
    pub ad: f64,
    pub ae: f64,
    pub af: f64,
    pub ah: f64,
    pub b: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub h: f64,
}

/// Coefficient set of `N_d` for `d ∈ {3, 5, 7, 9}`, `0 < s < π/2`.
pub fn cap_kernel_coefficients(d: u32, s: f64) -> Result<CapCoefficients> {
    if !(s > 0.0 && s < FRAC_PI_2) {
        return argument(format!("cap angle s must lie in (0, π/2), got {s}"));
    }
    let (sn, c) = s.sin_cos();
    let c2 = c * c;
    let c4 = c2 * c2;
    let c6 = c4 * c2;
    let c8 = c4 * c4;
    let (a, ab, ad, ae, af, ah) = match d {
        3 => (
            0.5 * s - 0.25 * (2.0 * s).sin(),
            -0.25,
            0.25 * (1.0 + (2.0 * s).cos()),
            0.0,
            0.0,
            0.0,
        ),
        5 => (
            0.25 * sn * c * c2 - 5.0 / 8.0 * sn * c + 3.0 / 8.0 * s,
            -3.0 / 16.0,
            0.75 * c2 - 0.25 * c4,
            -0.25 * c4,
            0.0,
            0.0,
        ),
        7 => (
            5.0 / 16.0 * s - 11.0 / 16.0 * sn * c + 13.0 / 24.0 * sn * c * c2 - sn * c4 * c / 6.0,
            -5.0 / 32.0,
            15.0 / 16.0 * c2 - 5.0 / 8.0 * c4 + c6 / 6.0,
            -5.0 / 8.0 * c4 + c6 / 6.0,
            0.25 * c6,
            0.0,
        ),
        9 => (
            35.0 / 128.0 * s - 93.0 / 128.0 * sn * c + 163.0 / 192.0 * sn * c * c2
                - 25.0 / 48.0 * sn * c4 * c
                + 0.125 * sn * c6 * c,
            -35.0 / 256.0,
            (105.0 * c2 - 105.0 * c4 + 56.0 * c6 - 12.0 * c8) / 96.0,
            (-105.0 * c4 + 56.0 * c6 - 12.0 * c8) / 96.0,
            (84.0 * c6 - 18.0 * c8) / 96.0,
            -30.0 * c8 / 96.0,
        ),
        other => {
            return argument(format!(
                "cap kernels exist for d in {{3, 5, 7, 9}}, got {other}"
            ))
        }
    };
    if !(a > 0.0) {
        return argument(format!(
            "degenerate cap: normalization a = {a} is not positive"
        ));
    }
    Ok(CapCoefficients {
        sphere_dim: d,
        s,
        a,
        ab,
        ad,
        ae,
        af,
        ah,
        b: ab / a,
        d: ad / a,
        e: ae / a,
        f: af / a,
        h: ah / a,
    })
}

/// The normalized cap self-convolution `N_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapConvKernel {
    coeffs: CapCoefficients,
    knot: f64,
}

impl CapConvKernel {
    pub fn new(d: u32, s: f64) -> Result<Self> {
        let coeffs = cap_kernel_coefficients(d, s)?;
        Ok(Self {
            coeffs,
            knot: (2.0 * s).cos(),
        })
    }

    pub fn coefficients(&self) -> &CapCoefficients {
        &self.coeffs
    }

    pub fn sphere_dim(&self) -> u32 {
        self.coeffs.sphere_dim
    }

    pub fn s(&self) -> f64 {
        self.coeffs.s
    }

    /// Support boundary `cos 2s`.
    pub fn knot(&self) -> f64 {
        self.knot
    }

    /// The closed-form expression without the support cut, for `x > -1`.
    pub fn closed_form(&self, x: f64) -> f64 {
        let x = snap_unit(x);
        if x == 1.0 {
            return 1.0;
        }
        let k = &self.coeffs;
        let theta = x.acos();
        let ratio = if x > 0.9 {
            (0.5 * theta).tan()
        } else {
            ((1.0 - x) / (1.0 + x)).sqrt()
        };
        let inv_v = 1.0 / (1.0 + x);
        let tail = k.d + inv_v * (k.e + inv_v * (k.f + inv_v * k.h));
        1.0 + k.b * theta + ratio * tail
    }
}

impl Zonal for CapConvKernel {
    fn eval(&self, x: f64) -> f64 {
        let x = snap_unit(x);
        if x <= self.knot {
            return 0.0;
        }
        self.closed_form(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.knot]
    }

    fn descriptor(&self) -> Option<KernelDescriptor> {
        Some(KernelDescriptor::CapConv {
            d: self.coeffs.sphere_dim,
            s: self.coeffs.s,
        })
    }
}

/// `N_d(x)`.
pub fn eval_cap_kernel(d: u32, s: f64, x: f64) -> Result<f64> {
    let x = clamp_unit(x)?;
    Ok(CapConvKernel::new(d, s)?.eval(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn truncated_power_values() {
        let f2 = TruncatedPower::new(2, FRAC_PI_2).unwrap();
        assert_relative_eq!(
            eval_truncated_power(&f2, 1.0).unwrap(),
            FRAC_PI_2 * FRAC_PI_2
        );
        assert_eq!(eval_truncated_power(&f2, 0.0).unwrap(), 0.0);
        let f3 = TruncatedPower::new(3, 1.0).unwrap();
        assert_relative_eq!(
            eval_truncated_power(&f3, 0.5f64.cos()).unwrap(),
            0.125,
            max_relative = 1e-13
        );
    }

    #[test]
    fn truncated_power_validation() {
        assert!(TruncatedPower::new(0, 1.0).is_err());
        assert!(TruncatedPower::new(2, 0.0).is_err());
        assert!(TruncatedPower::new(2, PI).is_err());
    }

    #[test]
    fn closed_forms_at_knot_and_origin() {
        let t = FRAC_PI_2;
        assert!(
            eval_montee_closed_form(MonteeFamily::If2, t, t.cos())
                .unwrap()
                .abs()
                < 1e-15
        );
        let v = eval_montee_closed_form(MonteeFamily::If3, 1.0, 1.0).unwrap();
        assert_relative_eq!(v, 6.0 * 1f64.sin() - 5.0, max_relative = 1e-14);
        assert_eq!(
            eval_montee_closed_form(MonteeFamily::I2f4, 1.0, 1.5f64.cos()).unwrap(),
            0.0
        );
        assert!(MonteeFamily::parse("I3f4").is_err());
    }

    #[test]
    fn recurrence_reproduces_base_case() {
        for x in [-0.9, -0.2, 0.0, 0.4, 0.95, 1.0] {
            let r = eval_montee_recurrence(2, FRAC_PI_2, 1, x).unwrap();
            let c = eval_montee_closed_form(MonteeFamily::If2, FRAC_PI_2, x).unwrap();
            assert!((r - c).abs() < 1e-14, "x = {x}: {r} vs {c}");
        }
        assert!(eval_montee_recurrence(1, 1.0, 1, 1f64.cos()).unwrap().abs() < 1e-30);
        assert!(eval_montee_recurrence(0, 1.0, 1, 0.0).is_err());
        assert!(eval_montee_recurrence(3, 1.0, 2, 0.0).is_err());
    }

    #[test]
    fn recurrence_matches_printed_forms_for_three_and_four() {
        for &t in &[0.5, FRAC_PI_2, 2.5] {
            for x in [-0.7, 0.1, 0.6, 0.99] {
                let a = eval_montee_recurrence(3, t, 1, x).unwrap();
                let b = eval_montee_closed_form(MonteeFamily::If3, t, x).unwrap();
                assert!((a - b).abs() < 1e-12);
                let a = eval_montee_recurrence(4, t, 1, x).unwrap();
                let b = eval_montee_closed_form(MonteeFamily::If4, t, x).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn iterate_routes() {
        assert_eq!(
            MonteeIterate::new(2, 1, 1.0).unwrap().provenance(),
            "closed_form"
        );
        assert_eq!(
            MonteeIterate::new(5, 1, 1.0).unwrap().provenance(),
            "recurrence"
        );
        assert_eq!(
            MonteeIterate::new(4, 3, 1.0).unwrap().provenance(),
            "numeric"
        );
        let i3 = MonteeIterate::new(4, 3, 1.0).unwrap();
        assert_eq!(i3.eval(0.0), 0.0);
        assert!(i3.eval(0.9) > 0.0);
    }

    #[test]
    fn n3_coefficients_at_quarter_pi() {
        let k = cap_kernel_coefficients(3, FRAC_PI_4).unwrap();
        assert_relative_eq!(k.a, PI / 8.0 - 0.25, max_relative = 1e-15);
        assert_relative_eq!(k.a * k.d, 0.25, max_relative = 1e-15);
        assert_relative_eq!(k.a * k.b, -0.25, max_relative = 1e-15);
    }

    #[test]
    fn n5_normalization_at_third_pi() {
        let s = PI / 3.0;
        let k = cap_kernel_coefficients(5, s).unwrap();
        let expected =
            0.25 * s.sin() * s.cos().powi(3) - 5.0 / 8.0 * s.sin() * s.cos() + 3.0 / 8.0 * s;
        assert_relative_eq!(k.a, expected, max_relative = 1e-15);
    }

    #[test]
    fn cap_kernel_normalized_and_supported() {
        for d in [3, 5, 7, 9] {
            assert_eq!(eval_cap_kernel(d, 0.6, 1.0).unwrap(), 1.0);
            assert_eq!(eval_cap_kernel(d, 0.6, 1.3f64.cos()).unwrap(), 0.0);
        }
        assert!(
            eval_cap_kernel(3, FRAC_PI_4, FRAC_PI_2.cos())
                .unwrap()
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn n3_boundary_zero_algebra() {
        // 1 + 2s b + d tan s = 1 + (-s/2 + sin(2s)/4)/a = 1 - a/a
        for s in [0.1, 0.5, FRAC_PI_4, 1.2, 1.5] {
            let k = cap_kernel_coefficients(3, s).unwrap();
            let boundary = 1.0 + 2.0 * s * k.b + k.d * s.tan();
            assert!(boundary.abs() < 1e-12, "s = {s}: {boundary}");
        }
    }

    #[test]
    fn cap_kernel_rejects_bad_inputs() {
        assert!(CapConvKernel::new(4, 0.5).is_err());
        assert!(CapConvKernel::new(3, 0.0).is_err());
        assert!(CapConvKernel::new(3, FRAC_PI_2).is_err());
        assert!(eval_cap_kernel(11, 0.5, 0.0).is_err());
    }

    #[test]
    fn ratio_branches_agree_near_switch() {
        let k = CapConvKernel::new(5, 1.0).unwrap();
        let lo = k.eval(0.9 - 1e-12);
        let hi = k.eval(0.9 + 1e-12);
        assert!((lo - hi).abs() < 1e-9);
    }
}
