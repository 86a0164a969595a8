//! First-order oracle interface.

use rand::Rng as _;

use crate::rng::Rng;
use crate::vector::Vector;

/// A convex objective with a subgradient oracle, plus whatever is known
/// about its solution for verification purposes.
pub trait Problem: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Deterministic problems ignore `rng`.
    fn subgradient(&self, x: &[f64], rng: &mut Rng) -> Vector;

    fn known_minimizer(&self) -> Option<&[f64]> {
        None
    }

    fn known_fstar(&self) -> Option<f64> {
        None
    }

    /// Euclidean bound `G` on subgradient norms.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    /// Coordinate-wise bound `G∞`.
    fn lipschitz_inf(&self) -> Option<f64> {
        None
    }

    /// Whether `value` is cheap enough to evaluate at every recorded step.
    fn cheap_value(&self) -> bool {
        true
    }
}

/// Outcome of sampling a problem's subgradient inequality
/// `f(y) ≥ f(x) + ⟨g, y − x⟩` and Lipschitz bound.
#[derive(Debug, Clone, Default)]
pub struct OracleAudit {
    pub pairs: usize,
    pub worst_gap: f64,
    pub max_grad_norm: f64,
    pub lipschitz_violations: usize,
    pub subgradient_violations: usize,
}

impl OracleAudit {
    pub fn passed(&self) -> bool {
        self.lipschitz_violations == 0 && self.subgradient_violations == 0
    }
}

/// Draws `pairs` random `(x, y)` pairs in a box of half-width `radius`
/// around `center` and checks the subgradient inequality to 1e−9 absolute
/// and `‖g‖ ≤ G + 1e−12` when `G` is known.
pub fn audit_oracle(
    problem: &dyn Problem,
    center: &[f64],
    radius: f64,
    pairs: usize,
    rng: &mut Rng,
) -> OracleAudit {
    let dim = problem.dim();
    let mut audit = OracleAudit {
        pairs,
        worst_gap: f64::INFINITY,
        ..Default::default()
    };
    let draw = |rng: &mut Rng| -> Vector {
        (0..dim)
            .map(|i| center[i] + radius * (2.0 * rng.random::<f64>() - 1.0))
            .collect()
    };
    for _ in 0..pairs {
        let x = draw(rng);
        let y = draw(rng);
        let g = problem.subgradient(&x, rng);
        let linear = problem.value(&x) + crate::vector::dot(&g, &crate::vector::sub(&y, &x));
        let gap = problem.value(&y) - linear;
        audit.worst_gap = audit.worst_gap.min(gap);
        if gap < -1e-9 {
            audit.subgradient_violations += 1;
        }
        let gnorm = crate::vector::norm2(&g);
        audit.max_grad_norm = audit.max_grad_norm.max(gnorm);
        if let Some(lip) = problem.lipschitz() {
            if gnorm > lip + 1e-12 {
                audit.lipschitz_violations += 1;
            }
        }
    }
    audit
}
