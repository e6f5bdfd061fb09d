//! Gauss rules for the Gegenbauer weight `(1 - x²)^{λ - 1/2}` and the
//! panel/adaptive integrators built on them.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{argument, Error, Result};
use crate::gegenbauer::{self, GegenbauerParams};

/// Largest node count [`QuadratureRule::gegenbauer`] will build.
pub const MAX_ORDER: usize = 100_000;

/// Nodes per panel used by [`adaptive`].
const ADAPTIVE_NODES: usize = 16;
const ADAPTIVE_MAX_PANELS: usize = 20_000;

/// Gauss rule for `∫ f dΩ_λ`, `dΩ_λ(x) = (1 - x²)^{λ - 1/2} dx`.
///
/// Built once, never mutated; share it freely between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    params: GegenbauerParams,
}

impl QuadratureRule {
    /// Golub–Welsch on the Jacobi matrix of the weight, followed by one
    /// Newton polish of every node and Christoffel-function weights.
    pub fn gegenbauer(params: GegenbauerParams, order: usize) -> Result<Self> {
        if order == 0 {
            return argument("quadrature order must be at least 1");
        }
        if order > MAX_ORDER {
            return Err(Error::Resource(format!(
                "quadrature order {order} exceeds the limit of {MAX_ORDER}"
            )));
        }
        let lambda = params.lambda();
        let mass = gegenbauer::total_mass(params);
        // sqrt of the monic recurrence coefficients beta_1 .. beta_order
        let sqrt_beta: Vec<f64> = (1..=order)
            .map(|k| recurrence_beta(lambda, k).sqrt())
            .collect();

        let mut diag = vec![0.0; order];
        let mut off = vec![0.0; order];
        off[..order - 1].copy_from_slice(&sqrt_beta[..order - 1]);
        let mut first = vec![0.0; order];
        first[0] = 1.0;
        tridiagonal_ql(&mut diag, &mut off, &mut first)?;

        let mut nodes = diag;
        nodes.sort_by(f64::total_cmp);
        for x in nodes.iter_mut() {
            let (p, dp) = orthonormal_with_derivative(*x, order, mass, &sqrt_beta);
            if dp != 0.0 {
                let step = p / dp;
                if step.abs() < 1e-8 {
                    *x -= step;
                }
            }
        }
        // the weight is even, so the rule is too
        for i in 0..order / 2 {
            let j = order - 1 - i;
            let m = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -m;
            nodes[j] = m;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        let weights = nodes
            .iter()
            .map(|&x| christoffel(x, order, mass, &sqrt_beta))
            .collect();
        Ok(Self {
            nodes,
            weights,
            params,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn params(&self) -> GegenbauerParams {
        self.params
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Monic recurrence coefficient `β_k` for the weight `(1 - x²)^{λ - 1/2}`.
fn recurrence_beta(lambda: f64, k: usize) -> f64 {
    let kf = k as f64;
    if k == 1 {
        1.0 / (2.0 * (1.0 + lambda))
    } else {
        kf * (kf + 2.0 * lambda - 1.0) / (4.0 * (kf + lambda) * (kf + lambda - 1.0))
    }
}

/// Value and derivative of the orthonormal polynomial of degree `n`.
fn orthonormal_with_derivative(x: f64, n: usize, mass: f64, sqrt_beta: &[f64]) -> (f64, f64) {
    let mut p_prev = 0.0;
    let mut dp_prev = 0.0;
    let mut p = 1.0 / mass.sqrt();
    let mut dp = 0.0;
    for k in 0..n {
        let b_next = sqrt_beta[k];
        let b_cur = if k == 0 { 0.0 } else { sqrt_beta[k - 1] };
        let p_next = (x * p - b_cur * p_prev) / b_next;
        let dp_next = (p + x * dp - b_cur * dp_prev) / b_next;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
    }
    (p, dp)
}

/// Gauss weight at a node: `1 / Σ_{k<n} p_k(x)²`.
fn christoffel(x: f64, n: usize, mass: f64, sqrt_beta: &[f64]) -> f64 {
    let mut p_prev = 0.0;
    let mut p = 1.0 / mass.sqrt();
    let mut sum = p * p;
    for k in 0..n - 1 {
        let b_cur = if k == 0 { 0.0 } else { sqrt_beta[k - 1] };
        let p_next = (x * p - b_cur * p_prev) / sqrt_beta[k];
        p_prev = p;
        p = p_next;
        sum += p * p;
    }
    1.0 / sum
}

/// Implicit QL for a symmetric tridiagonal matrix. On return `diag` holds
/// the eigenvalues and `first` the first components of the eigenvectors.
/// `off[i]` couples rows `i` and `i + 1`; `off[n - 1]` must be zero.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], first: &mut [f64]) -> Result<()> {
    let n = diag.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::Internal("tridiagonal QL did not converge".into()));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let z = first[i + 1];
                first[i + 1] = s * first[i] + c * z;
                first[i] = c * first[i] - s * z;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

/// Cached Gauss–Legendre rule (the `λ = 1/2` Gegenbauer rule).
pub fn gauss_legendre(order: usize) -> Result<Arc<QuadratureRule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("quadrature cache poisoned").get(&order) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(QuadratureRule::gegenbauer(
        GegenbauerParams::new(0.5)?,
        order,
    )?);
    cache
        .lock()
        .expect("quadrature cache poisoned")
        .insert(order, Arc::clone(&rule));
    Ok(rule)
}

/// Gauss–Legendre on `[a, b]`.
pub fn legendre_on(rule: &QuadratureRule, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * rule.integrate(|u| f(mid + half * u))
}

/// Composite Gauss–Legendre over consecutive panels of a sorted break list.
pub fn integrate_panels(breaks: &[f64], order: usize, f: impl Fn(f64) -> f64) -> Result<f64> {
    let rule = gauss_legendre(order)?;
    Ok(breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| legendre_on(&rule, w[0], w[1], &f))
        .sum())
}

/// Sorted, de-duplicated break list clipped to `[lo, hi]`, endpoints included.
pub fn panel_breaks(lo: f64, hi: f64, interior: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let span = hi - lo;
    let mut out = vec![lo, hi];
    out.extend(
        interior
            .into_iter()
            .filter(|b| b.is_finite() && *b > lo && *b < hi),
    );
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * span.max(1.0));
    out
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of the local panel-halving discrepancies; an upper estimate.
    pub error: f64,
}

/// Adaptive bisection with 16-point Gauss–Legendre panels. The local error
/// estimate is the difference between a panel and its two halves.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Integral> {
    adaptive_with_breaks(f, &[a, b], tol)
}

/// [`adaptive`] started from an initial panel partition.
pub fn adaptive_with_breaks(f: &dyn Fn(f64) -> f64, breaks: &[f64], tol: f64) -> Result<Integral> {
    if !(tol > 0.0) {
        return argument("tolerance must be positive");
    }
    let rule = gauss_legendre(ADAPTIVE_NODES)?;
    let total = breaks.last().copied().unwrap_or(0.0) - breaks.first().copied().unwrap_or(0.0);
    if total <= 0.0 {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut stack: Vec<(f64, f64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1], legendre_on(&rule, w[0], w[1], f)))
        .collect();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut panels = stack.len();
    let mut unresolved = 0.0;
    while let Some((lo, hi, whole)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = legendre_on(&rule, lo, mid, f);
        let right = legendre_on(&rule, mid, hi, f);
        let refined = left + right;
        let diff = (refined - whole).abs();
        let share = tol * (hi - lo) / total;
        let floor = 8.0 * f64::EPSILON * (left.abs() + right.abs());
        if !refined.is_finite() {
            return Err(Error::Evaluation { x: mid });
        }
        if diff <= share.max(floor) {
            value += refined;
            error += diff;
        } else if panels >= ADAPTIVE_MAX_PANELS || mid <= lo || mid >= hi {
            value += refined;
            error += diff;
            unresolved += diff;
        } else {
            panels += 1;
            stack.push((lo, mid, left));
            stack.push((mid, hi, right));
        }
    }
    if unresolved > 0.0 && error > tol {
        return Err(Error::Accuracy {
            achieved: error,
            requested: tol,
        });
    }
    Ok(Integral { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn p(lambda: f64) -> GegenbauerParams {
        GegenbauerParams::new(lambda).unwrap()
    }

    #[test]
    fn total_weight_matches_mass() {
        let rule = QuadratureRule::gegenbauer(p(0.5), 5).unwrap();
        assert_relative_eq!(
            rule.weights().iter().sum::<f64>(),
            2.0,
            max_relative = 1e-14
        );
        let rule = QuadratureRule::gegenbauer(p(1.0), 5).unwrap();
        assert_relative_eq!(
            rule.weights().iter().sum::<f64>(),
            PI / 2.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn second_moment_for_lambda_one() {
        let rule = QuadratureRule::gegenbauer(p(1.0), 8).unwrap();
        assert_relative_eq!(rule.integrate(|x| x * x), PI / 8.0, max_relative = 1e-14);
    }

    #[test]
    fn chebyshev_nodes_for_lambda_zero() {
        let n = 7;
        let rule = QuadratureRule::gegenbauer(p(0.0), n).unwrap();
        for (i, &x) in rule.nodes().iter().enumerate() {
            let expected = -((2 * i + 1) as f64 * PI / (2 * n) as f64).cos();
            assert!((x - expected).abs() < 1e-14, "{x} vs {expected}");
        }
        for &w in rule.weights() {
            assert_relative_eq!(w, PI / n as f64, max_relative = 1e-13);
        }
    }

    #[test]
    fn nodes_increasing_weights_positive() {
        for lambda in [0.0, 0.25, 0.5, 1.0, 2.0, 7.5] {
            let rule = QuadratureRule::gegenbauer(p(lambda), 40).unwrap();
            assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            assert!(rule.nodes().iter().all(|&x| x > -1.0 && x < 1.0));
        }
    }

    #[test]
    fn order_limits() {
        assert!(matches!(
            QuadratureRule::gegenbauer(p(1.0), 0),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            QuadratureRule::gegenbauer(p(1.0), MAX_ORDER + 1),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 sqrt(x) dx = 2/3
        let r = adaptive(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-13).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_respects_breaks() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 2.0 };
        let r = adaptive_with_breaks(&step, &[-1.0, 0.3, 1.0], 1e-12).unwrap();
        assert!((r.value - (1.3 + 1.4)).abs() < 1e-13);
    }

    #[test]
    fn panel_breaks_dedup_and_clip() {
        let b = panel_breaks(0.0, 1.0, [0.5, 0.5, 2.0, -1.0, 0.25]);
        assert_eq!(b, vec![0.0, 0.25, 0.5, 1.0]);
    }
}
