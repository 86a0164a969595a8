use crate::error::{Error, Result};

/// A weighted running sum `uₖ₊₁ = uₖ + gₖ/cᵏ` paired with the EMA
/// `ûₖ₊₁ = cûₖ + (1 − c)gₖ`. Starting both from zero keeps
/// `ûₖ₊₁ = cᵏ(1 − c)uₖ₊₁` for every `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmaPair {
    pub c: f64,
    pub u: f64,
    pub u_hat: f64,
    pub k: u32,
}

impl EmaPair {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::config(format!("EMA constant must lie in (0, 1), got {c}")));
        }
        Ok(Self {
            c,
            u: 0.0,
            u_hat: 0.0,
            k: 0,
        })
    }

    pub fn step(&mut self, g: f64) {
        self.u += g / self.c.powi(self.k as i32);
        self.u_hat = self.c * self.u_hat + (1.0 - self.c) * g;
        self.k += 1;
    }

    /// `cᵏ⁻¹(1 − c)u` for the current (post-step) state, which should equal
    /// `û`.
    pub fn predicted_u_hat(&self) -> f64 {
        if self.k == 0 {
            return 0.0;
        }
        self.c.powi(self.k as i32 - 1) * (1.0 - self.c) * self.u
    }
}
