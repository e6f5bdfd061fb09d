//! Named identity checks run by `zonalhop verify`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
use std::sync::Arc;

use serde::Serialize;

use crate::convolution::{
    cap_transform, cap_transform_quadrature, conv_property_check, dimension_hop_conv, hop_constant,
    CapFunction, CapMontee, Conv0Kernel, DEFAULT_CONV_ORDER,
};
use crate::dimension_ops::{
    check_descente_on_gegenbauer, check_montee_on_gegenbauer, coeff_map_derivative,
    descente_numeric, grid, montee_numeric, DEFAULT_MONTEE_TOL,
};
use crate::error::{argument, Result};
use crate::families::{
    cap_kernel_coefficients, eval_montee_closed_form, eval_montee_recurrence, CapConvKernel,
    MonteeFamily, TruncatedPower,
};
use crate::gegenbauer::GegenbauerParams;
use crate::kernel::{Kernel, Zonal};
use crate::transform::fourier_transform;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

type CheckFn = fn() -> Result<f64>;

/// Name, default tolerance, implementation.
const CHECKS: &[(&str, f64, CheckFn)] = &[
    ("operator_identities", 1e-9, operator_identities),
    ("coefficient_mapping", 1e-4, coefficient_mapping),
    ("montee_closed_forms", 1e-8, montee_closed_forms),
    ("montee_recurrence", 1e-8, montee_recurrence),
    ("hop_normalizations", 1e-8, hop_normalizations),
    ("cap_kernel_boundary", 1e-10, cap_kernel_boundary),
    ("cap_kernel_vs_hop", 1e-6, cap_kernel_vs_hop),
    ("cap_transform", 1e-10, cap_transform_check),
    ("convolution_algebra", 1e-8, convolution_algebra),
    ("hop_constant", 1e-12, hop_constant_check),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

/// Run the selected checks (all when `only` is empty). `tol` replaces
/// every default tolerance.
pub fn run_checks(only: &[String], tol: Option<f64>) -> Result<VerifyReport> {
    for name in only {
        if !CHECKS.iter().any(|c| c.0 == name) {
            return argument(format!(
                "unknown check {name:?}; known: {}",
                check_names().join(", ")
            ));
        }
    }
    let mut checks = Vec::new();
    for &(name, default_tol, run) in CHECKS {
        if !only.is_empty() && !only.iter().any(|o| o == name) {
            continue;
        }
        let tolerance = tol.unwrap_or(default_tol);
        let max_deviation = run()?;
        checks.push(CheckOutcome {
            name,
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
        });
    }
    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn p(lambda: f64) -> GegenbauerParams {
    GegenbauerParams::new(lambda).expect("valid index")
}

const LAMBDAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
const SUPPORT_ANGLES: [f64; 3] = [0.5, FRAC_PI_2, 2.5];
const GRID: usize = 401;

fn operator_identities() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for lambda in LAMBDAS {
        for n in 1..=10 {
            worst = worst.max(check_descente_on_gegenbauer(p(lambda), n)?);
            worst = worst.max(check_montee_on_gegenbauer(p(lambda), n)?);
        }
    }
    Ok(worst)
}

fn coefficient_mapping() -> Result<f64> {
    let f2: Kernel = Arc::new(TruncatedPower::new(2, FRAC_PI_2)?);
    let params = p(1.0);
    let mapped = coeff_map_derivative(&fourier_transform(f2.as_ref(), params, 31, 96)?)?;
    let direct = fourier_transform(&descente_numeric(f2, 1e-10)?, params.raised(), 30, 96)?;
    Ok(mapped
        .as_slice()
        .iter()
        .zip(direct.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn max_grid_gap(a: &dyn Zonal, b: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    grid(GRID).try_fold(0.0f64, |acc, x| Ok(acc.max((a.eval(x) - b(x)?).abs())))
}

fn montee_closed_forms() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for family in [
        MonteeFamily::If2,
        MonteeFamily::If3,
        MonteeFamily::I2f3,
        MonteeFamily::If4,
        MonteeFamily::I2f4,
    ] {
        for t in SUPPORT_ANGLES {
            let parent: Kernel = if family.montee_count() == 1 {
                Arc::new(TruncatedPower::new(family.exponent(), t)?)
            } else {
                let inner =
                    MonteeFamily::lookup(family.exponent(), 1).expect("first montée is printed");
                Arc::new(
                    crate::kernel::FnKernel::new("closed form", move |x| {
                        eval_montee_closed_form(inner, t, x).unwrap_or(f64::NAN)
                    })
                    .with_breakpoints(vec![t.cos()]),
                )
            };
            let numeric = montee_numeric(parent, DEFAULT_MONTEE_TOL)?;
            worst = worst.max(max_grid_gap(&numeric, |x| {
                eval_montee_closed_form(family, t, x)
            })?);
        }
    }
    Ok(worst)
}

fn montee_recurrence() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for m in 1..=8 {
        for t in SUPPORT_ANGLES {
            let numeric = montee_numeric(Arc::new(TruncatedPower::new(m, t)?), DEFAULT_MONTEE_TOL)?;
            worst = worst.max(max_grid_gap(&numeric, |x| {
                eval_montee_recurrence(m, t, 1, x)
            })?);
        }
    }
    Ok(worst)
}

fn hop_normalizations() -> Result<f64> {
    let mut worst: f64 = 0.0;
    let s = FRAC_PI_4;
    let g: Kernel = Arc::new(CapFunction::new(s.cos())?);
    let v = dimension_hop_conv(&g, &g, p(1.0), 1.0, DEFAULT_CONV_ORDER)?.value;
    worst = worst.max((v - (0.5 * s - 0.25 * (2.0 * s).sin())).abs());
    for s in [FRAC_PI_6, FRAC_PI_3] {
        let g: Kernel = Arc::new(CapFunction::new(s.cos())?);
        for k in 2..=4u32 {
            let v = dimension_hop_conv(&g, &g, p(f64::from(k)), 1.0, DEFAULT_CONV_ORDER)?.value;
            worst = worst.max((v - cap_kernel_coefficients(2 * k + 1, s)?.a).abs());
        }
    }
    Ok(worst)
}

fn cap_kernel_boundary() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for d in [3, 5, 7, 9] {
        for s in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
            let k = CapConvKernel::new(d, s)?;
            worst = worst.max((k.eval(1.0) - 1.0).abs());
            worst = worst.max(k.closed_form(k.knot()).abs());
        }
    }
    Ok(worst)
}

fn cap_kernel_vs_hop() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
        let ig: Kernel = Arc::new(CapMontee::new(s.cos(), 1)?);
        let h: Kernel = Arc::new(Conv0Kernel::new(Arc::clone(&ig), ig, DEFAULT_CONV_ORDER)?);
        let dh = descente_numeric(h, 1e-10)?;
        let n3 = CapConvKernel::new(3, s)?;
        let a = n3.coefficients().a;
        for i in 1..=101 {
            let x = -1.0 + 2.0 * i as f64 / 102.0;
            if (x - n3.knot()).abs() < 1e-9 {
                continue;
            }
            worst = worst.max((dh.eval(x) / a - n3.eval(x)).abs());
        }
    }
    Ok(worst)
}

fn cap_transform_check() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for lambda in [1.0, 2.0] {
        for c in [-0.5, 0.0, 0.5] {
            for n in 1..=15 {
                let closed = cap_transform(p(lambda), c, n)?.value;
                let quad = cap_transform_quadrature(p(lambda), c, n, 96)?;
                worst = worst.max((closed - quad).abs());
            }
        }
    }
    Ok(worst)
}

fn convolution_algebra() -> Result<f64> {
    let f: Kernel = Arc::new(CapFunction::new(0.0)?);
    let g: Kernel = Arc::new(CapFunction::new(0.5)?);
    let h: Kernel = Arc::new(TruncatedPower::new(2, 1.0)?);
    let mut worst: f64 = 0.0;
    for lambda in [0.0, 1.0] {
        let r = conv_property_check(&f, &g, &h, p(lambda), 32)?;
        worst = worst
            .max(r.commutativity)
            .max(r.associativity)
            .max(r.multiplicativity);
        if !r.norm_bound_holds() {
            worst = f64::INFINITY;
        }
    }
    Ok(worst)
}

fn hop_constant_check() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for lambda in LAMBDAS {
        for n in 0..=20 {
            worst = worst.max((hop_constant(p(lambda), n) - 1.0 / (2.0 * lambda + 1.0)).abs());
        }
    }
    Ok(worst)
}
