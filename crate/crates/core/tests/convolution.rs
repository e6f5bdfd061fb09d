use std::sync::Arc;

use zonalhop::convolution::{
    cap_self_convolution, cap_transform, conv_lambda_coeffs, dimension_hop_conv, CapFunction,
    HopConvolution, DEFAULT_CONV_ORDER,
};
use zonalhop::gegenbauer::eval;
use zonalhop::transform::fourier_transform;
use zonalhop::{GegenbauerParams, Kernel, SeriesCoeffs};

fn p(lambda: f64) -> GegenbauerParams {
    GegenbauerParams::new(lambda).unwrap()
}

fn cap(c: f64) -> Kernel {
    Arc::new(CapFunction::new(c).unwrap())
}

fn cap_coeffs(params: GegenbauerParams, c: f64, n: usize) -> SeriesCoeffs {
    fourier_transform(cap(c).as_ref(), params, n, 96).unwrap()
}

#[test]
fn hop_matches_series_product() {
    for c in [0.0, 0.5] {
        let chi = cap_coeffs(p(1.0), c, 60);
        let product = conv_lambda_coeffs(&chi, &chi).unwrap();
        let g = cap(c);
        for i in 1..=101 {
            let x = -1.0 + 2.0 * f64::from(i) / 102.0;
            let hop = dimension_hop_conv(&g, &g, p(1.0), x, DEFAULT_CONV_ORDER)
                .unwrap()
                .value;
            let series = product.eval(x).unwrap();
            assert!(
                (hop - series).abs() <= 2e-3,
                "c={c} x={x}: {hop} vs {series}"
            );
        }
    }
}

#[test]
fn hop_transform_is_product_of_transforms() {
    let g = cap(0.0);
    let hop = HopConvolution::new(Arc::clone(&g), g, p(1.0), DEFAULT_CONV_ORDER).unwrap();
    let direct = fourier_transform(&hop, p(1.0), 30, 96).unwrap();
    let chi = cap_coeffs(p(1.0), 0.0, 30);
    let product = conv_lambda_coeffs(&chi, &chi).unwrap();
    for (a, b) in direct.as_slice().iter().zip(product.as_slice()) {
        assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
    }
}

#[test]
fn self_convolutions_have_nonnegative_coefficients() {
    for lambda in [1.0, 2.0] {
        for c in [-0.5, 0.0, 0.5] {
            let k = cap_self_convolution(p(lambda), c).unwrap();
            let t = fourier_transform(k.as_ref(), p(lambda), 30, 96).unwrap();
            for (n, v) in t.as_slice().iter().enumerate() {
                assert!(*v >= -1e-12, "lambda={lambda} c={c} n={n}: {v}");
            }
        }
    }
}

#[test]
fn self_convolution_positive_at_one() {
    for lambda in [1.0, 2.0, 3.0, 4.0] {
        for c in [-0.5, 0.0, 0.5, 0.9] {
            let g = cap(c);
            let v = dimension_hop_conv(&g, &g, p(lambda), 1.0, DEFAULT_CONV_ORDER)
                .unwrap()
                .value;
            assert!(v > 0.0, "lambda={lambda} c={c}");
        }
    }
}

/// Zeros of `C^λ_n` in (0, 1), largest first, by sign changes and bisection.
fn zeros(params: GegenbauerParams, n: usize) -> Vec<f64> {
    let f = |x: f64| eval(params, n, x).unwrap();
    let mut out = Vec::new();
    let steps = 4000;
    let mut hi = 1.0;
    for i in (0..steps).rev() {
        let lo = -1.0 + 2.0 * f64::from(i) / f64::from(steps);
        if f(lo) == 0.0 {
            out.push(lo);
        } else if f(lo).signum() != f(hi).signum() && f(hi) != 0.0 {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(m).signum() == f(a).signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
        hi = lo;
    }
    out
}

#[test]
fn interlacing() {
    let params = p(1.0);
    for n in 2..=10 {
        for c in zeros(params.raised(), n - 1).into_iter().take(3) {
            let v = cap_transform(params, c, n + 1).unwrap().value;
            assert!(v.abs() > 1e-10, "n={n} c={c}: transform {v}");
        }
    }
}

#[test]
fn unsupported_hops_are_reported() {
    let g = cap(0.5);
    assert!(HopConvolution::new(Arc::clone(&g), Arc::clone(&g), p(1.5), 32).is_err());
    assert!(HopConvolution::new(Arc::clone(&g), g, p(9.0), 32).is_err());
}
