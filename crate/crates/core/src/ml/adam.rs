use crate::dadapt::{check_d0, check_gradient};
use crate::error::{Error, Result};
use crate::trajectory::StepRecord;
use crate::vector::{norm1, norm2_sq, zeros, Vector};

use super::check_multiplier;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub d0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Decoupled weight decay; the effective rate is `decay · dₖγₖ`.
    pub decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            d0: 1e-6,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            decay: 0.0,
        }
    }
}

/// Adam with D-Adaptation.
///
/// The moments carry no bias correction; the `d` scaling absorbs it. `d̂`
/// normalizes the EMA'd hyper-gradient `r` by `(1 − √β₂)‖s‖₁`, where `s` is
/// an EMA of `dγg` with rate `√β₂`.
///
/// The parameter step uses `Aₖ₊₁⁻¹mₖ₊₁` while `r` weighs `⟨gₖ, sₖ⟩` by the
/// same-step `Aₖ₊₁⁻¹`; both follow the update listing as written.
#[derive(Debug, Clone)]
pub struct DAdaptAdam {
    x: Vector,
    m: Vector,
    v: Vector,
    s: Vector,
    r: f64,
    k: usize,
    d: f64,
    dhat_last: f64,
    config: AdamConfig,
}

impl DAdaptAdam {
    pub fn new(x0: Vector, config: AdamConfig) -> Result<Self> {
        check_d0(config.d0)?;
        if !(0.0..1.0).contains(&config.beta1) || !(config.beta2 > 0.0 && config.beta2 < 1.0) {
            return Err(Error::config("Adam betas must satisfy 0 <= beta1 < 1 and 0 < beta2 < 1"));
        }
        if !(config.eps >= 0.0) || !(config.decay >= 0.0) {
            return Err(Error::config("eps and decay must be non-negative"));
        }
        let dim = x0.len();
        Ok(Self {
            x: x0,
            m: zeros(dim),
            v: zeros(dim),
            s: zeros(dim),
            r: 0.0,
            k: 0,
            d: config.d0,
            dhat_last: 0.0,
            config,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn r(&self) -> f64 {
        self.r
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

    pub fn step(&mut self, g: &[f64], gamma: f64) -> Result<StepRecord> {
        check_gradient(g, self.x.len())?;
        check_multiplier(gamma)?;
        let AdamConfig {
            beta1,
            beta2,
            eps,
            decay,
            ..
        } = self.config;
        let d = self.d;
        let lr = d * gamma;
        let sqrt_b2 = beta2.sqrt();

        let mut g_dot_s = 0.0;
        let mut g_metric2 = 0.0;
        for i in 0..g.len() {
            let gi = g[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * lr * gi;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * gi * gi;
            let a = self.v[i].sqrt() + eps;
            self.x[i] -= self.m[i] / a;
            // s is still sₖ here
            g_dot_s += gi * self.s[i] / a;
            g_metric2 += gi * gi / a;
        }
        if decay > 0.0 {
            let shrink = 1.0 - decay * lr;
            self.x.iter_mut().for_each(|xi| *xi *= shrink);
        }
        self.r = sqrt_b2 * self.r + (1.0 - sqrt_b2) * lr * g_dot_s;
        for (si, gi) in self.s.iter_mut().zip(g) {
            *si = sqrt_b2 * *si + (1.0 - sqrt_b2) * lr * gi;
        }
        let s_l1 = norm1(&self.s);
        let dhat = if s_l1 == 0.0 {
            0.0
        } else {
            self.r / ((1.0 - sqrt_b2) * s_l1)
        };
        let d_next = d.max(dhat);
        let record = StepRecord {
            k: self.k,
            d,
            d_next,
            dhat,
            gamma,
            gamma_next: gamma,
            weight: lr,
            scale: lr,
            f: None,
            gnorm2: norm2_sq(g),
            g_dot_s,
            g_metric2,
            s_metric2_next: norm2_sq(&self.s),
            s_norm_next: s_l1,
            numer_opt1: f64::NAN,
            numer_opt2: self.r,
            a_norm1_next: None,
        };
        self.d = d_next;
        self.dhat_last = dhat;
        self.k += 1;
        Ok(record)
    }
}
