//! Model description files.
//!
//! ```toml
//! [model]
//! kind = "power"          # finite | pw | power | ls | custom
//! alpha = 0.75
//!
//! [model.truncation]
//! n_max = 100000
//! tail_tol = 1e-6
//! ```

use super::{CustomFamily, HermiteBiehlerModel, Truncation, ZeroFamily};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    /// Explicit zeros `[re, im]` of Θ.
    Finite {
        zeros: Vec<[f64; 2]>,
        #[serde(default)]
        a_phase: f64,
    },
    Pw { a: f64 },
    Power {
        alpha: f64,
        #[serde(default)]
        a_phase: f64,
    },
    Ls {
        delta: f64,
        #[serde(default)]
        a_phase: f64,
    },
    /// `z(t) = sign(t) x_scale |t|^x_exponent + i y_scale (1 + |t|)^(-y_exponent)`.
    Custom {
        #[serde(default = "one")]
        x_scale: f64,
        x_exponent: f64,
        #[serde(default = "one")]
        y_scale: f64,
        #[serde(default)]
        y_exponent: f64,
        #[serde(default)]
        a_phase: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(flatten)]
    pub spec: ModelSpec,
    #[serde(default)]
    pub truncation: Truncation,
}

#[derive(Deserialize)]
struct ModelFile {
    model: ModelConfig,
}

impl ModelConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let f: ModelFile = toml::from_str(s)?;
        Ok(f.model)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<HermiteBiehlerModel> {
        let (family, a_phase) = match &self.spec {
            ModelSpec::Finite { zeros, a_phase } => (
                ZeroFamily::FiniteList(zeros.iter().map(|p| Complex64::new(p[0], p[1])).collect()),
                *a_phase,
            ),
            ModelSpec::Pw { a } => (ZeroFamily::PwExponential { a: *a }, *a),
            ModelSpec::Power { alpha, a_phase } => (ZeroFamily::Power { alpha: *alpha }, *a_phase),
            ModelSpec::Ls { delta, a_phase } => (ZeroFamily::Ls { delta: *delta }, *a_phase),
            ModelSpec::Custom { x_scale, x_exponent, y_scale, y_exponent, a_phase } => {
                if !(*x_scale > 0.0 && *y_scale > 0.0) {
                    return Err(Error::InvalidModel("custom scales must be positive".into()));
                }
                let (xs, xe, ys, ye) = (*x_scale, *x_exponent, *y_scale, *y_exponent);
                let generator = Arc::new(move |t: f64| {
                    Complex64::new(t.signum() * xs * t.abs().powf(xe), ys * (1.0 + t.abs()).powf(-ye))
                });
                let family = ZeroFamily::Custom(CustomFamily {
                    label: format!("{xs}|t|^{xe} + i{ys}(1+|t|)^-{ye}"),
                    generator,
                    include_zero_index: true,
                    x_exponent: xe,
                    y_exponent: ye,
                    symmetric: true,
                });
                (family, *a_phase)
            }
        };
        HermiteBiehlerModel::new(family, a_phase, self.truncation)
    }
}
