//! Calibrated zero-norm regularized least squares for errors-in-variables
//! sparse regression.
//!
//! Pipeline: corrupted data `(Z, y)` → unbiased surrogate `(sigma_hat, xi_hat)`
//! → PSD calibration `(z_tilde, y_tilde)` → multi-stage weighted lasso.

pub mod baselines;
pub mod calibration;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod gep;
pub mod linalg;
pub mod simulation;
pub mod surrogate;
pub mod wls;

pub use calibration::{calibrate, calibrate_with_policy, CalibratedPair, EpsPolicy};
pub use error::{Error, Result};
pub use gep::{fit, FitResult, GepConfig};
pub use surrogate::{ErrorModel, SurrogatePair};
