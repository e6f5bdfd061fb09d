//! Zonal functions `f : [-1, 1] -> R`, evaluated as `f(cos θ)`.

use std::fmt;
use std::sync::Arc;

use crate::descriptor::KernelDescriptor;
use crate::gegenbauer::{self, snap_unit, GegenbauerParams};

/// A zonal function on `[-1, 1]`.
///
/// `eval` is infallible; an evaluator that cannot produce a value returns
/// NaN, which the transform and integration layers turn into errors.
pub trait Zonal: Send + Sync + fmt::Debug {
    /// Value at `x`; callers pass `x` in `[-1, 1]`.
    fn eval(&self, x: f64) -> f64;

    /// Abscissae in `(-1, 1)` where the function or a low derivative is not
    /// smooth. Quadrature splits there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `Some(g)` when this function is `I g` exactly, so that descente can
    /// return `g` without differencing.
    fn montee_source(&self) -> Option<Kernel> {
        None
    }

    /// Closed-form montée image `I f`, when one is known.
    fn montee(&self) -> Option<Kernel> {
        None
    }

    /// JSON descriptor, for kernels that have one.
    fn descriptor(&self) -> Option<KernelDescriptor> {
        None
    }
}

/// Shared handle to a zonal function.
pub type Kernel = Arc<dyn Zonal>;

/// Breakpoints of a kernel mapped to angles `θ = arccos x`, sorted.
pub(crate) fn breakpoint_angles(f: &dyn Zonal) -> Vec<f64> {
    let mut out: Vec<f64> = f
        .breakpoints()
        .into_iter()
        .filter(|b| b.abs() < 1.0)
        .map(f64::acos)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// The constant function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Zonal for Constant {
    fn eval(&self, _x: f64) -> f64 {
        self.0
    }

    fn montee(&self) -> Option<Kernel> {
        let c = self.0;
        Some(Arc::new(Polynomial::new(vec![c, c])))
    }
}

/// Polynomial in `x` with monomial coefficients `c_0 + c_1 x + …`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }
}

impl Zonal for Polynomial {
    fn eval(&self, x: f64) -> f64 {
        let x = snap_unit(x);
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    fn montee(&self) -> Option<Kernel> {
        // ∫_{-1}^x p = P(x) - P(-1)
        let mut integral = vec![0.0];
        integral.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k + 1) as f64),
        );
        let at_minus_one = Polynomial::new(integral.clone()).eval(-1.0);
        integral[0] -= at_minus_one;
        Some(Arc::new(Polynomial::new(integral)))
    }
}

/// `C^λ_n`, or `W^λ_n = C^λ_n / C^λ_n(1)` when `normalized`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerKernel {
    pub params: GegenbauerParams,
    pub degree: usize,
    pub normalized: bool,
}

impl GegenbauerKernel {
    pub fn new(params: GegenbauerParams, degree: usize) -> Self {
        Self {
            params,
            degree,
            normalized: false,
        }
    }

    pub fn normalized(params: GegenbauerParams, degree: usize) -> Self {
        Self {
            params,
            degree,
            normalized: true,
        }
    }
}

impl Zonal for GegenbauerKernel {
    fn eval(&self, x: f64) -> f64 {
        let v = gegenbauer::eval_unchecked(self.params, self.degree, snap_unit(x));
        if self.normalized {
            v / gegenbauer::at_one(self.params, self.degree)
        } else {
            v
        }
    }
}

/// Positive multiple of another kernel.
#[derive(Debug, Clone)]
pub struct Scaled {
    pub factor: f64,
    pub inner: Kernel,
}

impl Zonal for Scaled {
    fn eval(&self, x: f64) -> f64 {
        self.factor * self.inner.eval(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }

    fn montee_source(&self) -> Option<Kernel> {
        self.inner.montee_source().map(|g| -> Kernel {
            Arc::new(Scaled {
                factor: self.factor,
                inner: g,
            })
        })
    }

    fn montee(&self) -> Option<Kernel> {
        self.inner.montee().map(|g| -> Kernel {
            Arc::new(Scaled {
                factor: self.factor,
                inner: g,
            })
        })
    }
}

/// Kernel backed by a closure, with optional breakpoints.
pub struct FnKernel<F> {
    f: F,
    breaks: Vec<f64>,
    label: &'static str,
}

impl<F> FnKernel<F>
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    pub fn new(label: &'static str, f: F) -> Self {
        Self {
            f,
            breaks: Vec::new(),
            label,
        }
    }

    pub fn with_breakpoints(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = breaks;
        self
    }
}

impl<F> fmt::Debug for FnKernel<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnKernel")
            .field("label", &self.label)
            .finish()
    }
}

impl<F> Zonal for FnKernel<F>
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn eval(&self, x: f64) -> f64 {
        (self.f)(snap_unit(x))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breaks.clone()
    }
}
