//! D-Adaptation for convex Lipschitz problems: dual averaging (both `d̂`
//! options, with or without `G` in the step-size denominator), gradient
//! descent, and coordinate-wise AdaGrad.

mod adagrad;
mod dual_averaging;
mod gradient_descent;
mod run;
mod select;

pub use adagrad::DAdaptAdaGrad;
pub use dual_averaging::{DOption, DualAveraging, GMode};
pub use gradient_descent::DAdaptGd;
pub use run::{run_convex, ConvexConfig, ConvexMethod, ConvexRun, SelectedIterate};
pub use select::select_return_index;

use crate::error::{Error, Result};

pub(crate) fn check_d0(d0: f64) -> Result<()> {
    if d0 > 0.0 && d0.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("d0 must be positive and finite, got {d0}")))
    }
}

pub(crate) fn check_gradient(g: &[f64], dim: usize) -> Result<()> {
    if g.len() != dim {
        return Err(Error::precondition(format!(
            "gradient has dimension {}, expected {dim}",
            g.len()
        )));
    }
    if !crate::vector::is_finite(g) {
        return Err(Error::precondition("gradient has non-finite entries"));
    }
    Ok(())
}
