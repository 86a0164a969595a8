use crate::error::{Error, Result};
use crate::trajectory::StepRecord;
use crate::vector::{norm1, zeros, Vector};

use super::{check_d0, check_gradient};

/// D-Adapted AdaGrad: coordinate-wise denominators `aₖ` and an ℓ∞ distance
/// estimate.
///
/// `step` accepts a schedule multiplier `γₖ`; the dual sum then grows by
/// `λₖ = dₖγₖ`. With `γₖ = 1` this is the plain method. The ℓ∞ lower bound
/// holds for any positive weights, so the multiplier does not affect it.
#[derive(Debug, Clone)]
pub struct DAdaptAdaGrad {
    x0: Vector,
    x: Vector,
    s: Vector,
    a: Vector,
    k: usize,
    d: f64,
    dhat_last: f64,
    /// `Σ λᵢ² ‖gᵢ‖²_{Aᵢ⁻¹}`
    sum_weighted_coord: f64,
    /// `Σ λᵢ ⟨gᵢ, Aᵢ⁻¹sᵢ⟩`
    hypergrad_sum: f64,
    lipschitz_inf: f64,
}

impl DAdaptAdaGrad {
    pub fn new(x0: Vector, d0: f64, lipschitz_inf: f64) -> Result<Self> {
        check_d0(d0)?;
        if !(lipschitz_inf > 0.0 && lipschitz_inf.is_finite()) {
            return Err(Error::config(format!(
                "G_inf must be positive, got {lipschitz_inf}"
            )));
        }
        let dim = x0.len();
        Ok(Self {
            x: x0.clone(),
            x0,
            s: zeros(dim),
            a: vec![lipschitz_inf; dim],
            k: 0,
            d: d0,
            dhat_last: 0.0,
            sum_weighted_coord: 0.0,
            hypergrad_sum: 0.0,
            lipschitz_inf,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn a(&self) -> &[f64] {
        &self.a
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

    pub fn lipschitz_inf(&self) -> f64 {
        self.lipschitz_inf
    }

    pub fn step(&mut self, g: &[f64], gamma: f64) -> Result<StepRecord> {
        check_gradient(g, self.x0.len())?;
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::precondition(format!(
                "schedule multiplier must lie in (0, 1], got {gamma}"
            )));
        }
        let d = self.d;
        let lambda = d * gamma;

        let mut gnorm2 = 0.0;
        let mut g_metric2 = 0.0;
        let mut g_dot_s = 0.0;
        for ((gi, ai), si) in g.iter().zip(&self.a).zip(&self.s) {
            gnorm2 += gi * gi;
            g_metric2 += gi * gi / ai;
            g_dot_s += gi * si / ai;
        }
        self.sum_weighted_coord += lambda * lambda * g_metric2;
        self.hypergrad_sum += lambda * g_dot_s;

        let mut s_metric2 = 0.0;
        for ((si, ai), gi) in self.s.iter_mut().zip(self.a.iter_mut()).zip(g) {
            *si += lambda * gi;
            *ai = (*ai * *ai + gi * gi).sqrt();
            s_metric2 += *si * *si / *ai;
        }
        let s_l1 = norm1(&self.s);
        let numer_opt1 = 0.5 * (s_metric2 - self.sum_weighted_coord);
        let dhat = if s_l1 == 0.0 { 0.0 } else { numer_opt1 / s_l1 };
        let d_next = d.max(dhat);

        for (((xi, x0i), si), ai) in self.x.iter_mut().zip(&self.x0).zip(&self.s).zip(&self.a) {
            *xi = x0i - si / ai;
        }

        let record = StepRecord {
            k: self.k,
            d,
            d_next,
            dhat,
            gamma: 1.0,
            gamma_next: 1.0,
            weight: lambda,
            scale: gamma,
            f: None,
            gnorm2,
            g_dot_s,
            g_metric2,
            s_metric2_next: s_metric2,
            s_norm_next: s_l1,
            numer_opt1,
            numer_opt2: self.hypergrad_sum,
            a_norm1_next: Some(norm1(&self.a)),
        };
        self.d = d_next;
        self.dhat_last = dhat;
        self.k += 1;
        Ok(record)
    }
}
