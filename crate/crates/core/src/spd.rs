//! Evidence for positive definiteness: Gegenbauer coefficient scans and
//! Gram matrices on point sets.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dimension_ops::grid;
use crate::error::{argument, Error, Result};
use crate::gegenbauer::GegenbauerParams;
use crate::kernel::Zonal;
use crate::transform::{fourier_transform_estimate, SeriesCoeffs};

/// Positive entries needed in each parity class before a scan counts as
/// evidence of infinitely many.
pub const DEFAULT_E_MIN: usize = 10;
/// A coefficient is positive when it exceeds this multiple of its
/// quadrature error estimate.
pub const POSITIVE_FACTOR: f64 = 10.0;
/// Smallest truncation accepted by [`classify`].
pub const MIN_TRUNCATION: usize = 10;
/// Relative eigenvalue floor below which a Gram matrix is not PD.
pub const EIGEN_TOL: f64 = 1e-10;
/// Allowed deviation of `‖x‖` from one.
pub const UNIT_TOL: f64 = 1e-12;

const NONNEGATIVITY_GRID: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationFlags {
    /// No coefficient below `-tol` up to the truncation.
    pub schoenberg_up_to_n: bool,
    /// Schoenberg, with at least `e_min` positive even and odd entries.
    pub cms_evidence: bool,
    /// Every coefficient positive and `f ≥ -tol` on a grid.
    pub cx_evidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub lambda: f64,
    pub truncation: usize,
    pub tol: f64,
    pub e_min: usize,
    pub coeffs: SeriesCoeffs,
    pub errors: Vec<f64>,
    pub min_coeff: f64,
    pub neg_count: usize,
    pub pos_even: usize,
    pub pos_odd: usize,
    pub flags: ClassificationFlags,
    /// On the circle the CMS condition is necessary but not sufficient for
    /// strict positive definiteness.
    pub cms_interpretation: String,
}

impl ClassificationReport {
    /// Whether entry `n` counts as strictly positive.
    pub fn is_positive(&self, n: usize) -> bool {
        is_positive(self.coeffs.as_slice()[n], self.errors[n], self.tol)
    }
}

fn is_positive(c: f64, err: f64, tol: f64) -> bool {
    c > POSITIVE_FACTOR * err && c > tol
}

/// Scan `f̂_λ(0..=n)` for Schoenberg, CMS and CX evidence.
pub fn classify(
    f: &dyn Zonal,
    params: GegenbauerParams,
    n: usize,
    tol: f64,
    order: usize,
) -> Result<ClassificationReport> {
    classify_with(f, params, n, tol, order, DEFAULT_E_MIN)
}

pub fn classify_with(
    f: &dyn Zonal,
    params: GegenbauerParams,
    n: usize,
    tol: f64,
    order: usize,
    e_min: usize,
) -> Result<ClassificationReport> {
    if n < MIN_TRUNCATION {
        return argument(format!(
            "classification needs truncation N >= {MIN_TRUNCATION}, got {n}"
        ));
    }
    if !(tol >= 0.0) {
        return argument("tolerance must be nonnegative");
    }
    let est = fourier_transform_estimate(f, params, n, order)?;
    let values = est.coeffs.as_slice();
    let min_coeff = values.iter().copied().fold(f64::INFINITY, f64::min);
    let neg_count = values.iter().filter(|&&c| c < -tol).count();
    let positive: Vec<bool> = values
        .iter()
        .zip(&est.errors)
        .map(|(&c, &e)| is_positive(c, e, tol))
        .collect();
    let pos_even = positive.iter().step_by(2).filter(|&&p| p).count();
    let pos_odd = positive.iter().skip(1).step_by(2).filter(|&&p| p).count();
    let schoenberg = neg_count == 0;
    let cms = schoenberg && pos_even >= e_min && pos_odd >= e_min;
    let all_positive = positive.iter().all(|&p| p);
    let cx = all_positive && grid(NONNEGATIVITY_GRID).all(|x| f.eval(x) >= -tol);
    Ok(ClassificationReport {
        lambda: params.lambda(),
        truncation: n,
        tol,
        e_min,
        errors: est.errors,
        coeffs: est.coeffs,
        min_coeff,
        neg_count,
        pos_even,
        pos_odd,
        flags: ClassificationFlags {
            schoenberg_up_to_n: schoenberg,
            cms_evidence: cms,
            cx_evidence: cx,
        },
        cms_interpretation: if params.is_zero() {
            "necessary-only"
        } else {
            "sufficient"
        }
        .to_string(),
    })
}

/// Distinct unit vectors in `R^{d+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPointSet")]
pub struct PointSet {
    d: usize,
    points: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawPointSet {
    d: usize,
    points: Vec<Vec<f64>>,
}

impl TryFrom<RawPointSet> for PointSet {
    type Error = Error;

    fn try_from(raw: RawPointSet) -> Result<Self> {
        PointSet::new(raw.d, raw.points)
    }
}

impl PointSet {
    pub fn new(d: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if d == 0 {
            return argument("sphere dimension must be at least 1");
        }
        if points.is_empty() {
            return argument("a point set needs at least one point");
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != d + 1 {
                return argument(format!(
                    "point {i} has {} coordinates, expected {}",
                    p.len(),
                    d + 1
                ));
            }
            let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !((norm - 1.0).abs() <= UNIT_TOL) {
                return argument(format!("point {i} has norm {norm}, not 1"));
            }
        }
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return argument(format!("points {j} and {i} coincide"));
                }
            }
        }
        Ok(Self { d, points })
    }

    /// Points on `S²` from longitude/latitude in degrees.
    pub fn from_lonlat(lonlat: &[(f64, f64)]) -> Result<Self> {
        let points = lonlat
            .iter()
            .map(|&(lon, lat)| {
                let (lo, la) = (lon.to_radians(), lat.to_radians());
                vec![la.cos() * lo.cos(), la.cos() * lo.sin(), la.sin()]
            })
            .collect();
        Self::new(2, points)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Smallest pairwise geodesic distance; infinite for a single point.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in 0..i {
                best = best.min(geodesic(&self.points[i], &self.points[j]));
            }
        }
        best
    }

    /// Apply an orthogonal matrix (row-major, `(d+1)²` entries).
    pub fn rotated(&self, q: &DMatrix<f64>) -> Result<Self> {
        let n = self.d + 1;
        if q.nrows() != n || q.ncols() != n {
            return argument("rotation has the wrong size");
        }
        let points = self
            .points
            .iter()
            .map(|p| {
                (q * nalgebra::DVector::from_column_slice(p))
                    .as_slice()
                    .to_vec()
            })
            .collect();
        Self::new(self.d, points)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x * y)
        .sum::<f64>()
        .clamp(-1.0, 1.0)
}

/// `arccos` of the clamped inner product.
pub fn geodesic(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).acos()
}

/// `M_X = [f(x_i · x_j)]`.
pub fn gram_matrix(f: &dyn Zonal, pts: &PointSet) -> Result<DMatrix<f64>> {
    let n = pts.len();
    let mut m = DMatrix::zeros(n, n);
    let diag = f.eval(1.0);
    for i in 0..n {
        m[(i, i)] = diag;
        for j in 0..i {
            let v = f.eval(dot(&pts.points[i], &pts.points[j]));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    if let Some(bad) = m.iter().position(|v| !v.is_finite()) {
        let (i, j) = (bad % n, bad / n);
        return Err(Error::Evaluation {
            x: dot(&pts.points[i], &pts.points[j]),
        });
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GramSpectrum {
    pub min_eig: f64,
    pub max_abs_eig: f64,
    /// `min_eig > -EIGEN_TOL · ‖M‖`.
    pub positive_definite: bool,
}

pub fn gram_spectrum(f: &dyn Zonal, pts: &PointSet) -> Result<GramSpectrum> {
    let m = gram_matrix(f, pts)?;
    if m != m.transpose() {
        return Err(Error::Internal("Gram matrix is not symmetric".into()));
    }
    let eig = SymmetricEigen::new(m).eigenvalues;
    let min_eig = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let max_abs_eig = eig.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(GramSpectrum {
        min_eig,
        max_abs_eig,
        positive_definite: min_eig > -EIGEN_TOL * max_abs_eig,
    })
}

/// Smallest eigenvalue of the Gram matrix.
pub fn gram_min_eig(f: &dyn Zonal, pts: &PointSet) -> Result<f64> {
    Ok(gram_spectrum(f, pts)?.min_eig)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointScheme {
    RandomSeeded,
    FibonacciS2,
}

impl FromStr for PointScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_seeded" | "random" => Ok(Self::RandomSeeded),
            "fibonacci_s2" | "fibonacci" => Ok(Self::FibonacciS2),
            other => argument(format!("unknown point scheme {other:?}")),
        }
    }
}

const MAX_DRAWS_PER_POINT: usize = 64;

/// Deterministic point sets: seeded Gaussian directions, or the spherical
/// Fibonacci lattice on `S²`.
pub fn generate_points(d: usize, n: usize, scheme: PointScheme, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return argument("need at least one point");
    }
    if d == 0 {
        return argument("sphere dimension must be at least 1");
    }
    match scheme {
        PointScheme::FibonacciS2 => {
            if d != 2 {
                return argument("the Fibonacci lattice is defined on S² only");
            }
            let golden = PI * (3.0 - 5f64.sqrt());
            let points = (0..n)
                .map(|i| {
                    let z = 1.0 - (2 * i + 1) as f64 / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let (s, c) = (golden * i as f64).sin_cos();
                    normalize(vec![r * c, r * s, z])
                })
                .collect();
            PointSet::new(2, points)
        }
        PointScheme::RandomSeeded => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut points: Vec<Vec<f64>> = Vec::with_capacity(n);
            let mut draws = 0;
            while points.len() < n {
                draws += 1;
                if draws > MAX_DRAWS_PER_POINT * n {
                    return Err(Error::Resource(
                        "could not draw enough distinct points".into(),
                    ));
                }
                let v: Vec<f64> = (0..=d).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm < 1e-8 {
                    continue;
                }
                let p = normalize(v);
                if points.contains(&p) {
                    continue;
                }
                points.push(p);
            }
            PointSet::new(d, points)
        }
    }
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}
