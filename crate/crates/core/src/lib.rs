//! Gegenbauer analysis on spheres: montée and descente between `S^d` and
//! `S^{d+2}`, the `⋆_λ` convolutions, locally supported strictly positive
//! definite zonal kernels, and scattered-data interpolation with them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod cli;
pub mod convolution;
pub mod descriptor;
pub mod dimension_ops;
pub mod error;
pub mod families;
pub mod gegenbauer;
pub mod interpolation;
pub mod kernel;
pub mod quadrature;
pub mod spd;
pub mod transform;

pub use descriptor::KernelDescriptor;
pub use error::{Error, Result};
pub use gegenbauer::GegenbauerParams;
pub use kernel::{Kernel, Zonal};
pub use transform::SeriesCoeffs;
