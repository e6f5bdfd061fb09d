//! Scattered-data interpolation `s(x) = Σ c_j g(θ(x, x_j))` on `S^d`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::descriptor::KernelDescriptor;
use crate::error::{argument, Error, Result};
use crate::gegenbauer::GegenbauerParams;
use crate::kernel::Kernel;
use crate::spd::{dot, gram_matrix, PointSet, UNIT_TOL};

/// Required residual, relative to `‖f‖_∞`.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Lower-triangular Cholesky factor. Fails with the index of the first
/// pivot that is not positive.
pub fn cholesky(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return argument("Cholesky needs a square matrix");
    }
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = m[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > 0.0) {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: diag,
            });
        }
        let root = diag.sqrt();
        l[(j, j)] = root;
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / root;
        }
    }
    Ok(l)
}

/// Solve `L Lᵀ x = b`.
pub fn cholesky_solve(l: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let n = l.nrows();
    let mut y = b.to_vec();
    for i in 0..n {
        let mut v = y[i];
        for k in 0..i {
            v -= l[(i, k)] * y[k];
        }
        y[i] = v / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in i + 1..n {
            v -= l[(k, i)] * y[k];
        }
        y[i] = v / l[(i, i)];
    }
    y
}

#[derive(Debug, Clone, Serialize)]
pub struct Interpolant {
    pub kernel: Option<KernelDescriptor>,
    pub centers: PointSet,
    pub coefficients: Vec<f64>,
    /// `‖M c - f‖_∞` at solve time.
    pub residual: f64,
    #[serde(skip)]
    evaluator: Option<Kernel>,
}

#[derive(Deserialize)]
struct RawInterpolant {
    kernel: KernelDescriptor,
    centers: PointSet,
    coefficients: Vec<f64>,
    #[serde(default)]
    residual: f64,
    #[serde(default)]
    lambda: Option<f64>,
}

impl<'de> Deserialize<'de> for Interpolant {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawInterpolant::deserialize(de)?;
        let params = raw
            .lambda
            .map(GegenbauerParams::new)
            .transpose()
            .map_err(serde::de::Error::custom)?;
        let kernel = raw.kernel.build(params).map_err(serde::de::Error::custom)?;
        if raw.coefficients.len() != raw.centers.len() {
            return Err(serde::de::Error::custom(
                "coefficient count does not match center count",
            ));
        }
        Ok(Interpolant {
            kernel: Some(raw.kernel),
            centers: raw.centers,
            coefficients: raw.coefficients,
            residual: raw.residual,
            evaluator: Some(kernel),
        })
    }
}

impl Interpolant {
    /// Assemble from known coefficients without solving.
    pub fn from_parts(kernel: Kernel, centers: PointSet, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != centers.len() {
            return argument("coefficient count does not match center count");
        }
        Ok(Self {
            kernel: kernel.descriptor(),
            centers,
            coefficients,
            residual: 0.0,
            evaluator: Some(kernel),
        })
    }

    fn kernel_ref(&self) -> Result<&Kernel> {
        self.evaluator
            .as_ref()
            .ok_or_else(|| Error::Internal("interpolant has no kernel".into()))
    }

    /// `s(x)`; `x` must be a unit vector.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let dim = self.centers.dim() + 1;
        if x.len() != dim {
            return argument(format!("point has {} coordinates, expected {dim}", x.len()));
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= UNIT_TOL) {
            return argument(format!("evaluation point has norm {norm}, not 1"));
        }
        let k = self.kernel_ref()?;
        let value: f64 = self
            .centers
            .points()
            .iter()
            .zip(&self.coefficients)
            .map(|(p, c)| c * k.eval(dot(x, p)))
            .sum();
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Evaluation { x: f64::NAN })
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Argument(format!("bad interpolant: {e}")))
    }
}

/// Solve `M_X c = f` by Cholesky and check the residual.
pub fn solve_interpolation(pts: &PointSet, values: &[f64], kernel: Kernel) -> Result<Interpolant> {
    if values.len() != pts.len() {
        return argument(format!("{} values for {} points", values.len(), pts.len()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return argument("data values must be finite");
    }
    let m = gram_matrix(kernel.as_ref(), pts)?;
    let l = cholesky(&m)?;
    let c = cholesky_solve(&l, values);
    let mc = &m * DVector::from_column_slice(&c);
    let residual = mc
        .iter()
        .zip(values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let requested = RESIDUAL_TOL * scale;
    if !(residual <= requested) {
        return Err(Error::Accuracy {
            achieved: residual,
            requested,
        });
    }
    Ok(Interpolant {
        kernel: kernel.descriptor(),
        centers: pts.clone(),
        coefficients: c,
        residual,
        evaluator: Some(Arc::clone(&kernel)),
    })
}
