use crate::error::{Error, Result};
use crate::trajectory::StepRecord;
use crate::vector::{axpy, dot, norm2_sq, zeros, Vector};

use super::{check_d0, check_gradient};

/// Gradient descent with D-Adaptation. Needs the Lipschitz constant `G`
/// for the step `λₖ = dₖ / √(G² + Σᵢ≤ₖ‖gᵢ‖²)`.
#[derive(Debug, Clone)]
pub struct DAdaptGd {
    x: Vector,
    s: Vector,
    k: usize,
    d: f64,
    dhat_last: f64,
    lipschitz: f64,
    sum_gsq: f64,
    /// `Σ λᵢ² ‖gᵢ‖²`
    sum_lambda_sq: f64,
    /// `Σ λᵢ ⟨gᵢ, sᵢ⟩`
    hypergrad_sum: f64,
    lambda: f64,
}

impl DAdaptGd {
    pub fn new(x0: Vector, d0: f64, lipschitz: f64) -> Result<Self> {
        check_d0(d0)?;
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::config(format!("G must be positive, got {lipschitz}")));
        }
        let dim = x0.len();
        Ok(Self {
            x: x0,
            s: zeros(dim),
            k: 0,
            d: d0,
            dhat_last: 0.0,
            lipschitz,
            sum_gsq: 0.0,
            sum_lambda_sq: 0.0,
            hypergrad_sum: 0.0,
            lambda: 0.0,
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

    /// `λ` of the most recent step.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn step(&mut self, g: &[f64]) -> Result<StepRecord> {
        check_gradient(g, self.x.len())?;
        let gnorm2 = norm2_sq(g);
        let d = self.d;
        self.sum_gsq += gnorm2;
        let lambda = d / (self.lipschitz * self.lipschitz + self.sum_gsq).sqrt();
        let g_dot_s = dot(g, &self.s);

        self.sum_lambda_sq += lambda * lambda * gnorm2;
        self.hypergrad_sum += lambda * g_dot_s;
        axpy(lambda, g, &mut self.s);
        axpy(-lambda, g, &mut self.x);

        let s_norm2 = norm2_sq(&self.s);
        let s_norm = s_norm2.sqrt();
        let numer_opt1 = 0.5 * (s_norm2 - self.sum_lambda_sq);
        let dhat = if s_norm == 0.0 { 0.0 } else { numer_opt1 / s_norm };
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
            numer_opt1,
            numer_opt2: self.hypergrad_sum,
            a_norm1_next: None,
        };
        self.d = d_next;
        self.dhat_last = dhat;
        self.lambda = lambda;
        self.k += 1;
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_trace_first_step() {
        let mut st = DAdaptGd::new(vec![1.0], 0.1, 1.0).unwrap();
        let r = st.step(&[1.0]).unwrap();
        let lambda0 = 0.1 / 2f64.sqrt();
        assert!((r.weight - lambda0).abs() < 1e-15);
        assert!((r.weight - 0.070_710_7).abs() < 1e-7);
        assert!((st.s()[0] - lambda0).abs() < 1e-15);
        assert!(r.dhat.abs() < 1e-15);
        assert!((st.x()[0] - 0.929_289_3).abs() < 1e-7);
    }

    #[test]
    fn two_steps_match_brute_force() {
        let mut st = DAdaptGd::new(vec![1.0], 0.1, 1.0).unwrap();
        st.step(&[1.0]).unwrap();
        let r = st.step(&[1.0]).unwrap();
        // brute force trace: d stays at d0 after step 0 because dhat_1 = 0
        let l0 = 0.1 / 2f64.sqrt();
        let l1 = 0.1 / 3f64.sqrt();
        let s = l0 + l1;
        let expected = (s * s - l0 * l0 - l1 * l1) / (2.0 * s);
        assert!((r.dhat - expected).abs() < 1e-15);
        assert!(r.dhat > 0.0);
    }

    #[test]
    fn zero_gradient_only_advances_k() {
        let mut st = DAdaptGd::new(vec![1.0], 0.1, 1.0).unwrap();
        st.step(&[1.0]).unwrap();
        let (x, s, d) = (st.x().to_vec(), st.s().to_vec(), st.d());
        let r = st.step(&[0.0]).unwrap();
        assert!(r.weight.is_finite());
        assert_eq!(st.x(), &x[..]);
        assert_eq!(st.s(), &s[..]);
        assert_eq!(st.d(), d);
        assert_eq!(st.k(), 2);
    }

    #[test]
    fn requires_lipschitz() {
        assert!(DAdaptGd::new(vec![1.0], 0.1, 0.0).is_err());
    }
}
