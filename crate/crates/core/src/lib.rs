//! Numerical laboratory for de Branges spaces and representing Fock-type weights.

pub mod error;
pub mod experiments;
pub mod kernels;
pub mod levelset;
pub mod model;
pub mod numeric;
pub mod quadrature;
pub mod weights;

pub use error::{Error, Result};
pub use kernels::{KernelEval, TestFunction, TestKind};
pub use model::{HermiteBiehlerModel, ModelConfig, ThetaValue, Truncation, ZeroFamily};
pub use num_complex::Complex64;
pub use weights::{WeightField, WeightKind};
