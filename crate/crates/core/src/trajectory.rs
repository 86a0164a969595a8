//! Per-step run records and the weighted average iterate.

use crate::vector::{axpy, Vector};

/// Which update rule produced a trajectory. The verifiers use this to pick
/// the matching inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    DualAveraging,
    GradientDescent,
    AdaGrad,
    Sgd,
    Adam,
    Baseline,
}

/// One optimizer step `k`: the gradient `gₖ` was taken at `xₖ`, and the
/// step produced `sₖ₊₁`, `γₖ₊₁`, `d̂ₖ₊₁` and `dₖ₊₁`.
///
/// The diagnostic fields are expressed in the metric of the method: for
/// D-Adapted AdaGrad inner products and squared norms are weighted by the
/// diagonal `A⁻¹` and `s_norm` is the ℓ₁ norm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepRecord {
    pub k: usize,
    /// `dₖ`, the estimate used by this step.
    pub d: f64,
    /// `dₖ₊₁ = max(dₖ, d̂ₖ₊₁)`.
    pub d_next: f64,
    /// `d̂ₖ₊₁`, recorded raw (may be negative).
    pub dhat: f64,
    /// `γₖ` as it enters the analysis (1 for methods without a dual
    /// averaging scale).
    pub gamma: f64,
    pub gamma_next: f64,
    /// Multiplier of `gₖ` in `sₖ₊₁ = sₖ + weight·gₖ`; also the weight of
    /// `xₖ` in the returned average.
    pub weight: f64,
    /// The step-size quantity reported in CSV output: `γₖ` for dual
    /// averaging, `λₖ` for gradient descent and SGD, `dₖγₖ` for Adam,
    /// the raw step size for baselines.
    pub scale: f64,
    /// `f(xₖ)` when recorded.
    pub f: Option<f64>,
    pub gnorm2: f64,
    /// `⟨gₖ, sₖ⟩` (pre-update `s`).
    pub g_dot_s: f64,
    /// `‖gₖ‖²` in the method's metric, using the pre-update metric.
    pub g_metric2: f64,
    /// `‖sₖ₊₁‖²` in the method's metric.
    pub s_metric2_next: f64,
    pub s_norm_next: f64,
    /// Option I numerator `(γₖ₊₁‖sₖ₊₁‖² − Σγᵢwᵢ²‖gᵢ‖²)/2`.
    pub numer_opt1: f64,
    /// Option II numerator `Σγᵢwᵢ⟨gᵢ, sᵢ⟩`.
    pub numer_opt2: f64,
    /// `‖aₖ₊₁‖₁` for D-Adapted AdaGrad.
    pub a_norm1_next: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: RunKind,
    pub d0: f64,
    pub records: Vec<StepRecord>,
    avg_num: Vector,
    avg_den: f64,
}

impl Trajectory {
    pub fn new(kind: RunKind, dim: usize, d0: f64) -> Self {
        Self {
            kind,
            d0,
            records: Vec::new(),
            avg_num: vec![0.0; dim],
            avg_den: 0.0,
        }
    }

    pub fn push(&mut self, record: StepRecord) {
        self.records.push(record);
    }

    /// Adds `w·x` to the running weighted sum. `w = 0` is a no-op.
    pub fn weighted_average_update(&mut self, x: &[f64], w: f64) {
        debug_assert!(w >= 0.0);
        if w == 0.0 {
            return;
        }
        axpy(w, x, &mut self.avg_num);
        self.avg_den += w;
    }

    pub fn average(&self) -> Option<Vector> {
        (self.avg_den > 0.0).then(|| self.avg_num.iter().map(|v| v / self.avg_den).collect())
    }

    pub fn avg_den(&self) -> f64 {
        self.avg_den
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `d₀, d₁, …, dₙ₊₁`.
    pub fn d_sequence(&self) -> Vec<f64> {
        let mut seq = Vec::with_capacity(self.records.len() + 1);
        seq.push(self.d0);
        seq.extend(self.records.iter().map(|r| r.d_next));
        seq
    }

    pub fn final_d(&self) -> f64 {
        self.records.last().map_or(self.d0, |r| r.d_next)
    }

    pub fn d_monotone(&self) -> bool {
        self.d_sequence().windows(2).all(|w| w[1] >= w[0])
    }
}
