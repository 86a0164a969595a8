use crate::dadapt::{check_d0, check_gradient};
use crate::error::{Error, Result};
use crate::trajectory::StepRecord;
use crate::vector::{axpy, dot, norm2, norm2_sq, zeros, Vector};

use super::check_multiplier;

/// SGD with D-Adaptation.
///
/// `G` defaults to the norm of the first nonzero gradient. Steps taken
/// before any nonzero gradient only advance the counter. The `d̂` estimate
/// carries an extra factor of two relative to the dual-averaging Option II.
#[derive(Debug, Clone)]
pub struct DAdaptSgd {
    /// Averaged iterate, where gradients are evaluated.
    x: Vector,
    /// Base iterate.
    z: Vector,
    s: Vector,
    k: usize,
    d: f64,
    dhat_last: f64,
    lipschitz: Option<f64>,
    beta: f64,
    /// `Σ λᵢ ⟨gᵢ, sᵢ⟩`
    hypergrad_sum: f64,
    sum_lambda_sq: f64,
}

impl DAdaptSgd {
    pub fn new(x0: Vector, d0: f64, beta: f64, lipschitz: Option<f64>) -> Result<Self> {
        check_d0(d0)?;
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::config(format!("momentum must lie in [0, 1), got {beta}")));
        }
        if let Some(g) = lipschitz {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::config(format!("G must be positive, got {g}")));
            }
        }
        let dim = x0.len();
        Ok(Self {
            z: x0.clone(),
            x: x0,
            s: zeros(dim),
            k: 0,
            d: d0,
            dhat_last: 0.0,
            lipschitz,
            beta,
            hypergrad_sum: 0.0,
            sum_lambda_sq: 0.0,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn z(&self) -> &[f64] {
        &self.z
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

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    /// Returns `None` when the step was skipped because no gradient scale is
    /// known yet.
    pub fn step(&mut self, g: &[f64], gamma: f64) -> Result<Option<StepRecord>> {
        check_gradient(g, self.x.len())?;
        check_multiplier(gamma)?;
        let gnorm2 = norm2_sq(g);
        let big_g = match self.lipschitz {
            Some(v) => v,
            None if gnorm2 == 0.0 => {
                self.k += 1;
                return Ok(None);
            }
            None => {
                let v = norm2(g);
                self.lipschitz = Some(v);
                v
            }
        };
        let d = self.d;
        let lambda = d * gamma / big_g;
        let g_dot_s = dot(g, &self.s);
        self.hypergrad_sum += lambda * g_dot_s;
        self.sum_lambda_sq += lambda * lambda * gnorm2;
        axpy(lambda, g, &mut self.s);
        axpy(-lambda, g, &mut self.z);
        for (xi, zi) in self.x.iter_mut().zip(&self.z) {
            *xi = self.beta * *xi + (1.0 - self.beta) * zi;
        }
        let s_norm2 = norm2_sq(&self.s);
        let s_norm = s_norm2.sqrt();
        let dhat = if s_norm == 0.0 {
            0.0
        } else {
            2.0 * self.hypergrad_sum / s_norm
        };
        let d_next = d.max(dhat);
        let record = StepRecord {
            k: self.k,
            d,
            d_next,
            dhat,
            gamma: 1.0,
            gamma_next: 1.0,
            weight: lambda,
            scale: lambda,
            f: None,
            gnorm2,
            g_dot_s,
            g_metric2: gnorm2,
            s_metric2_next: s_norm2,
            s_norm_next: s_norm,
            numer_opt1: 0.5 * (s_norm2 - self.sum_lambda_sq),
            numer_opt2: self.hypergrad_sum,
            a_norm1_next: None,
        };
        self.d = d_next;
        self.dhat_last = dhat;
        self.k += 1;
        Ok(Some(record))
    }
}
