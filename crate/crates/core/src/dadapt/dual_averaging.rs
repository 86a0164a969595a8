use crate::error::{Error, Result};
use crate::trajectory::StepRecord;
use crate::vector::{axpy, dot, norm2_sq, zeros, Vector};

use super::{check_d0, check_gradient};

/// Which lower-bound estimate drives `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DOption {
    /// `d̂ = (γₖ₊₁‖sₖ₊₁‖² − Σγᵢdᵢ²‖gᵢ‖²) / (2‖sₖ₊₁‖)`
    I,
    /// `d̂ = Σdᵢγᵢ⟨gᵢ, sᵢ⟩ / ‖sₖ₊₁‖`
    II,
}

/// Step-size denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GMode {
    /// `γₖ₊₁ = 1/√(Σ‖gᵢ‖²)`, `γ₀ = 1/‖g₀‖`.
    None,
    /// `γₖ₊₁ = 1/√(G² + Σ‖gᵢ‖²)`, `γ₀ = 1/G`.
    Fixed(f64),
}

/// Dual averaging with D-Adaptation.
#[derive(Debug, Clone)]
pub struct DualAveraging {
    x0: Vector,
    x: Vector,
    s: Vector,
    k: usize,
    d: f64,
    dhat_last: f64,
    sum_gsq: f64,
    /// `Σ γᵢ dᵢ² ‖gᵢ‖²`
    sum_weighted: f64,
    /// `Σ dᵢ γᵢ ⟨gᵢ, sᵢ⟩`
    hypergrad_sum: f64,
    option: DOption,
    g_mode: GMode,
    /// `γₖ`; unset until the first gradient arrives.
    gamma: Option<f64>,
}

impl DualAveraging {
    pub fn new(x0: Vector, d0: f64, option: DOption, g_mode: GMode) -> Result<Self> {
        check_d0(d0)?;
        if let GMode::Fixed(g) = g_mode {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::config(format!("G must be positive, got {g}")));
            }
        }
        let dim = x0.len();
        Ok(Self {
            x: x0.clone(),
            x0,
            s: zeros(dim),
            k: 0,
            d: d0,
            dhat_last: 0.0,
            sum_gsq: 0.0,
            sum_weighted: 0.0,
            hypergrad_sum: 0.0,
            option,
            g_mode,
            gamma: None,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn dhat(&self) -> f64 {
        self.dhat_last
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    pub fn option(&self) -> DOption {
        self.option
    }

    pub fn g_mode(&self) -> GMode {
        self.g_mode
    }

    /// Consumes `gₖ` evaluated at [`Self::x`] and advances to `xₖ₊₁`.
    ///
    /// Accumulators use the pre-update `dₖ` and `γₖ`; `d̂ₖ₊₁` uses the
    /// post-update `γₖ₊₁` and `sₖ₊₁`.
    pub fn step(&mut self, g: &[f64]) -> Result<StepRecord> {
        check_gradient(g, self.x0.len())?;
        let gnorm2 = norm2_sq(g);
        let gamma = match self.gamma {
            Some(gamma) => gamma,
            None => {
                if gnorm2 == 0.0 {
                    return Err(Error::precondition(
                        "first gradient is zero; x0 is already optimal",
                    ));
                }
                match self.g_mode {
                    GMode::None => 1.0 / gnorm2.sqrt(),
                    GMode::Fixed(big_g) => 1.0 / big_g,
                }
            }
        };
        let d = self.d;
        let g_dot_s = dot(g, &self.s);

        self.sum_weighted += gamma * d * d * gnorm2;
        self.hypergrad_sum += d * gamma * g_dot_s;
        axpy(d, g, &mut self.s);
        self.sum_gsq += gnorm2;

        let gamma_next = match self.g_mode {
            GMode::None => 1.0 / self.sum_gsq.sqrt(),
            GMode::Fixed(big_g) => 1.0 / (big_g * big_g + self.sum_gsq).sqrt(),
        };
        let s_norm2 = norm2_sq(&self.s);
        let s_norm = s_norm2.sqrt();
        let numer_opt1 = 0.5 * (gamma_next * s_norm2 - self.sum_weighted);
        let numer_opt2 = self.hypergrad_sum;
        let dhat = if s_norm == 0.0 {
            0.0
        } else {
            match self.option {
                DOption::I => numer_opt1 / s_norm,
                DOption::II => numer_opt2 / s_norm,
            }
        };
        let d_next = d.max(dhat);

        for ((xi, x0i), si) in self.x.iter_mut().zip(&self.x0).zip(&self.s) {
            *xi = x0i - gamma_next * si;
        }

        let record = StepRecord {
            k: self.k,
            d,
            d_next,
            dhat,
            gamma,
            gamma_next,
            weight: d,
            scale: gamma,
            f: None,
            gnorm2,
            g_dot_s,
            g_metric2: gnorm2,
            s_metric2_next: s_norm2,
            s_norm_next: s_norm,
            numer_opt1,
            numer_opt2,
            a_norm1_next: None,
        };
        self.d = d_next;
        self.dhat_last = dhat;
        self.gamma = Some(gamma_next);
        self.k += 1;
        Ok(record)
    }
}
