use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use nalgebra::{DMatrix, Rotation3, Unit, Vector3};
use proptest::prelude::*;
use zonalhop::families::CapConvKernel;
use zonalhop::interpolation::{solve_interpolation, Interpolant};
use zonalhop::spd::{generate_points, PointScheme, PointSet};
use zonalhop::Kernel;

fn n5() -> Kernel {
    Arc::new(CapConvKernel::new(5, FRAC_PI_4).unwrap())
}

fn target(x: &[f64]) -> f64 {
    (x[0] + 0.5 * x[1]).exp() * (1.0 + x[2] * x[2])
}

fn max_error(itp: &Interpolant, probes: &PointSet) -> f64 {
    probes
        .points()
        .iter()
        .map(|y| (itp.evaluate(y).unwrap() - target(y)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn error_decreases_with_more_points() {
    let probes = generate_points(2, 400, PointScheme::RandomSeeded, 99).unwrap();
    let errors: Vec<f64> = [25, 50, 100]
        .iter()
        .map(|&n| {
            let pts = generate_points(2, n, PointScheme::FibonacciS2, 0).unwrap();
            let values: Vec<f64> = pts.points().iter().map(|x| target(x)).collect();
            max_error(&solve_interpolation(&pts, &values, n5()).unwrap(), &probes)
        })
        .collect();
    assert!(errors[2] < errors[0], "{errors:?}");
}

#[test]
fn reproduces_its_own_coefficients() {
    let pts = generate_points(2, 40, PointScheme::FibonacciS2, 0).unwrap();
    let coeffs: Vec<f64> = (0..40).map(|i| (f64::from(i) * 0.7).sin()).collect();
    let s = Interpolant::from_parts(n5(), pts.clone(), coeffs.clone()).unwrap();
    let values: Vec<f64> = pts
        .points()
        .iter()
        .map(|x| s.evaluate(x).unwrap())
        .collect();
    let back = solve_interpolation(&pts, &values, n5()).unwrap();
    for (a, b) in back.coefficients.iter().zip(&coeffs) {
        assert!((a - b).abs() < 1e-10);
    }
}

fn rotation(axis: [f64; 3], angle: f64) -> DMatrix<f64> {
    let r = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::from(axis)), angle);
    DMatrix::from_column_slice(3, 3, r.matrix().as_slice())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rotation_equivariance(
        ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0,
        angle in 0.0f64..std::f64::consts::TAU,
        seed in 0u64..1000,
    ) {
        let q = rotation([ax, ay, az], angle);
        let pts = generate_points(2, 40, PointScheme::RandomSeeded, seed).unwrap();
        let probes = generate_points(2, 20, PointScheme::RandomSeeded, seed + 1).unwrap();
        let values: Vec<f64> = pts.points().iter().map(|x| target(x)).collect();
        let a = solve_interpolation(&pts, &values, n5()).unwrap();
        let b = solve_interpolation(&pts.rotated(&q).unwrap(), &values, n5()).unwrap();
        for (y, qy) in probes.points().iter().zip(probes.rotated(&q).unwrap().points()) {
            prop_assert!((a.evaluate(y).unwrap() - b.evaluate(qy).unwrap()).abs() <= 1e-10);
        }
    }

    #[test]
    fn permutation_invariance(perm in Just((0..30).collect::<Vec<usize>>()).prop_shuffle(), seed in 0u64..1000) {
        let pts = generate_points(2, 30, PointScheme::RandomSeeded, seed).unwrap();
        let values: Vec<f64> = pts.points().iter().map(|x| target(x)).collect();
        let shuffled = PointSet::new(2, perm.iter().map(|&i| pts.points()[i].clone()).collect()).unwrap();
        let shuffled_values: Vec<f64> = perm.iter().map(|&i| values[i]).collect();
        let a = solve_interpolation(&pts, &values, n5()).unwrap();
        let b = solve_interpolation(&shuffled, &shuffled_values, n5()).unwrap();
        let probes = generate_points(2, 20, PointScheme::RandomSeeded, seed + 7).unwrap();
        for y in probes.points() {
            prop_assert!((a.evaluate(y).unwrap() - b.evaluate(y).unwrap()).abs() <= 1e-10);
        }
        for (k, &i) in perm.iter().enumerate() {
            prop_assert!((b.coefficients[k] - a.coefficients[i]).abs() <= 1e-9);
        }
    }
}
