use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

use proptest::prelude::*;
use zonalhop::dimension_ops::grid;
use zonalhop::families::{eval_montee_recurrence, CapConvKernel, MonteeIterate, TruncatedPower};
use zonalhop::Zonal;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// j-th forward (dir = 1) or backward (dir = -1) difference quotient at `x`.
fn one_sided(f: &dyn Zonal, x: f64, j: usize, h: f64, dir: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..=j {
        let sign = if (j - i).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += sign * binomial(j, i) * f.eval(x + dir * i as f64 * h);
    }
    sum / (dir * h).powi(j as i32)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

#[test]
fn support_is_respected() {
    for t in [0.5, FRAC_PI_2, 2.5] {
        let knot = t.cos();
        for m in 1..=4 {
            let members: Vec<Box<dyn Zonal>> = vec![
                Box::new(TruncatedPower::new(m, t).unwrap()),
                Box::new(MonteeIterate::new(m, 1, t).unwrap()),
                Box::new(MonteeIterate::new(m, 2, t).unwrap()),
            ];
            for f in &members {
                for x in grid(2001).filter(|&x| x <= knot) {
                    assert_eq!(f.eval(x), 0.0, "m={m} t={t} x={x}");
                }
            }
        }
    }
    for d in [3, 5, 7, 9] {
        for s in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
            let k = CapConvKernel::new(d, s).unwrap();
            for x in grid(2001).filter(|&x| x <= k.knot()) {
                assert_eq!(k.eval(x), 0.0);
            }
        }
    }
}

#[test]
fn smoothness_ladder() {
    // (m, k): I^k f_m is claimed C^k; near the knot it behaves like
    // (x - cos t)^{m+k}_+ · m! / ((m+k)! sin^m t).
    let t = FRAC_PI_2;
    let knot = t.cos();
    for (m, k) in [(2u32, 0u32), (3, 1), (4, 2), (2, 1), (3, 2)] {
        let f: Box<dyn Zonal> = if k == 0 {
            Box::new(TruncatedPower::new(m, t).unwrap())
        } else {
            Box::new(MonteeIterate::new(m, k, t).unwrap())
        };
        for j in 0..=k as usize {
            let right = one_sided(f.as_ref(), knot, j, 1e-3, 1.0);
            let left = one_sided(f.as_ref(), knot, j, 1e-3, -1.0);
            assert!(
                (right - left).abs() <= 1e-4,
                "I^{k} f_{m}: derivative {j} jumps by {}",
                right - left
            );
        }
        let order = (m + k) as usize;
        let right = one_sided(f.as_ref(), knot, order, 1e-2, 1.0);
        let left = one_sided(f.as_ref(), knot, order, 1e-2, -1.0);
        let expected = factorial(m) / t.sin().powi(m as i32);
        assert!(left.abs() < 1e-9);
        assert!(
            (right - expected).abs() < 0.1 * expected,
            "I^{k} f_{m}: derivative {order} is {right}, want {expected}"
        );
    }
}

#[test]
fn cap_kernels_continuous_normalized_nonnegative() {
    for d in [3, 5, 7, 9] {
        for s in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3, 1.2] {
            let k = CapConvKernel::new(d, s).unwrap();
            assert!((k.eval(1.0) - 1.0).abs() < 1e-14);
            let values: Vec<f64> = grid(2001).map(|x| k.eval(x)).collect();
            assert!(values.iter().all(|&v| v >= -1e-12), "d={d} s={s}");
            // Equispaced in θ: the square-root behaviour at x = 1 is smooth there.
            let values: Vec<f64> = (0..=2000)
                .map(|i| k.eval((std::f64::consts::PI * f64::from(i) / 2000.0).cos()))
                .collect();
            let jump = values
                .windows(2)
                .map(|w| (w[1] - w[0]).abs())
                .fold(0.0, f64::max);
            assert!(jump < 0.01, "d={d} s={s}: step {jump}");
            let eps = 1e-9;
            assert!((k.eval(k.knot() + eps) - k.eval(k.knot() - eps)).abs() < 1e-6);
        }
    }
}

proptest! {
    #[test]
    fn truncated_power_matches_definition(m in 1u32..8, t in 0.05f64..3.1, x in -1.0f64..=1.0) {
        let f = TruncatedPower::new(m, t).unwrap();
        let want = (t - x.acos()).max(0.0).powi(m as i32);
        prop_assert!((f.eval(x) - want).abs() <= 1e-12 * (1.0 + want));
    }

    #[test]
    fn montee_images_are_nonnegative_and_monotone(m in 1u32..6, t in 0.1f64..3.0) {
        let f = MonteeIterate::new(m, 1, t).unwrap();
        let values: Vec<f64> = grid(201).map(|x| f.eval(x)).collect();
        prop_assert!(values.iter().all(|&v| v >= -1e-14));
        prop_assert!(values.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }
}

#[test]
fn recurrence_is_accurate_next_to_the_knot() {
    // Leading term u^{m+1} sin t / (m+1) with u = t - θ.
    for m in 1..=8u32 {
        for t in [0.5, 1.2, 2.5] {
            for u in [1e-6, 1e-4, 1e-2] {
                let v = eval_montee_recurrence(m, t, 1, (t - u).cos()).unwrap();
                let lead = u.powi(m as i32 + 1) * t.sin() / f64::from(m + 1);
                assert!(
                    v > 0.0 && ((v - lead) / lead).abs() < 2.0 * u / t.tan().abs().min(1.0),
                    "m={m} t={t} u={u}: {v} vs {lead}"
                );
            }
        }
    }
}
