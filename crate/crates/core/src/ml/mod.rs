//! Stochastic D-Adaptation variants: SGD with primal-averaging momentum and
//! Adam. Both use the hyper-gradient (Option II) form of `d̂` and take a
//! schedule multiplier `γₖ ∈ (0, 1]` per step.

mod adam;
mod ema;
mod sgd;

pub use adam::{AdamConfig, DAdaptAdam};
pub use ema::EmaPair;
pub use sgd::DAdaptSgd;

use crate::error::{Error, Result};

pub(crate) fn check_multiplier(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::precondition(format!(
            "schedule multiplier must lie in (0, 1], got {gamma}"
        )))
    }
}
