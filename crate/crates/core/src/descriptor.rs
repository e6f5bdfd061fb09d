//! JSON kernel descriptors.
//!
//! ```json
//! {"family": "cap_conv", "d": 3, "s": 0.7853981633974483}
//! {"family": "truncated_power", "m": 2, "t": 1.5707963267948966}
//! {"family": "montee", "m": 4, "k": 2, "t": 1.0}
//! {"family": "series", "coeffs": [1.0, 0.5, 0.25], "lambda": 1.0}
//! ```
//!
//! `series` coefficients are `c_n` in `f = Σ c_n W^λ_n`, the same numbers
//! the `coeffs` subcommand prints.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::families::{CapConvKernel, MonteeIterate, TruncatedPower};
use crate::gegenbauer::GegenbauerParams;
use crate::kernel::Kernel;
use crate::transform::{SeriesCoeffs, SeriesKernel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelDescriptor {
    TruncatedPower {
        m: u32,
        t: f64,
    },
    Montee {
        m: u32,
        k: u32,
        t: f64,
    },
    CapConv {
        d: u32,
        s: f64,
    },
    Series {
        coeffs: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
}

impl KernelDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Argument(format!("bad kernel descriptor: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serializes")
    }

    /// Family tag as it appears in JSON.
    pub fn family(&self) -> &'static str {
        match self {
            Self::TruncatedPower { .. } => "truncated_power",
            Self::Montee { .. } => "montee",
            Self::CapConv { .. } => "cap_conv",
            Self::Series { .. } => "series",
        }
    }

    /// Instantiate the kernel. A `series` descriptor without its own
    /// `lambda` takes `default_params`.
    pub fn build(&self, default_params: Option<GegenbauerParams>) -> Result<Kernel> {
        Ok(match *self {
            Self::TruncatedPower { m, t } => Arc::new(TruncatedPower::new(m, t)?),
            Self::Montee { m, k, t } => Arc::new(MonteeIterate::new(m, k, t)?),
            Self::CapConv { d, s } => Arc::new(CapConvKernel::new(d, s)?),
            Self::Series { ref coeffs, lambda } => {
                let params = match (lambda, default_params) {
                    (Some(l), _) => GegenbauerParams::new(l)?,
                    (None, Some(p)) => p,
                    (None, None) => return argument("series descriptor needs a lambda"),
                };
                Arc::new(SeriesKernel(SeriesCoeffs::from_expansion(params, coeffs)?))
            }
        })
    }
}
