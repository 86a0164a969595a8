use crate::error::{Error, Result};

use super::{log2_plus, BoundReport, INEQ_TOL};

fn check_norms(gnorms: &[f64], big_g: f64) -> Result<()> {
    if !(big_g > 0.0 && big_g.is_finite()) {
        return Err(Error::precondition(format!("G must be positive, got {big_g}")));
    }
    for (k, &g) in gnorms.iter().enumerate() {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::precondition(format!("‖g_{k}‖ = {g} is not a norm")));
        }
        if g > big_g {
            return Err(Error::precondition(format!("‖g_{k}‖ = {g} exceeds G = {big_g}")));
        }
    }
    Ok(())
}

/// `Σ‖gₖ‖²/√(G² + Σᵢ₍ₖ‖gᵢ‖²) ≤ 2√(Σ‖gₖ‖²)` for gradient norms bounded by `G`.
pub fn check_streeter_mcmahan(gnorms: &[f64], big_g: f64) -> Result<BoundReport> {
    check_norms(gnorms, big_g)?;
    let mut prefix = 0.0;
    let mut lhs = 0.0;
    for g in gnorms {
        let g2 = g * g;
        lhs += g2 / (big_g * big_g + prefix).sqrt();
        prefix += g2;
    }
    Ok(BoundReport::inequality("gradient_sum", lhs, 2.0 * prefix.sqrt(), INEQ_TOL)
        .with_context(format!("len={}", gnorms.len())))
}

/// With `γₖ = 1/√(G² + Σᵢ₍ₖ‖gᵢ‖²)`:
/// `Σγₖ‖gₖ‖²/2 ≤ γₙ₊₁(G² + Σ‖gₖ‖²)`.
pub fn check_adagrad_sum(gnorms: &[f64], big_g: f64) -> Result<BoundReport> {
    check_norms(gnorms, big_g)?;
    let g2 = big_g * big_g;
    let mut prefix = 0.0;
    let mut lhs = 0.0;
    for g in gnorms {
        lhs += 0.5 * g * g / (g2 + prefix).sqrt();
        prefix += g * g;
    }
    let rhs = (g2 + prefix) / (g2 + prefix).sqrt();
    Ok(BoundReport::inequality("gradient_sum_weighted", lhs, rhs, INEQ_TOL)
        .with_context(format!("len={}", gnorms.len())))
}

/// `Σ‖gₖ‖²/(G² + Σᵢ≤ₖ‖gᵢ‖²) ≤ log(n+2)`, the gradient descent analogue.
pub fn check_log_sum(gnorms: &[f64], big_g: f64) -> Result<BoundReport> {
    check_norms(gnorms, big_g)?;
    let mut prefix = big_g * big_g;
    let mut lhs = 0.0;
    for g in gnorms {
        prefix += g * g;
        lhs += g * g / prefix;
    }
    let rhs = ((gnorms.len() + 1) as f64).ln();
    Ok(BoundReport::inequality("gradient_sum_log", lhs, rhs, INEQ_TOL)
        .with_context(format!("len={}", gnorms.len())))
}

/// For a non-decreasing positive `d₀, …, d_{N+1}`:
/// `min_{n≤N} dₙ₊₁/Σₖ≤ₙdₖ ≤ 4·log₂₊(d_{N+1}/d₀)/(N+1)`, provided
/// `N+1 ≥ 2log₂(d_{N+1}/d₀)`. Otherwise the report is skipped.
pub fn check_mindk(d_seq: &[f64]) -> Result<BoundReport> {
    if d_seq.len() < 2 {
        return Err(Error::precondition("need at least d₀ and d₁"));
    }
    if d_seq.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(Error::precondition("d sequence must be positive and finite"));
    }
    if d_seq.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::precondition("d sequence must be non-decreasing"));
    }
    let big_n = d_seq.len() - 2;
    let ratio = d_seq[big_n + 1] / d_seq[0];
    let count = (big_n + 1) as f64;
    if count < 2.0 * ratio.log2() {
        return Ok(BoundReport::skipped(
            "min_ratio",
            format!("N+1={} < 2log2(d_(N+1)/d_0)={:.3}", big_n + 1, 2.0 * ratio.log2()),
        ));
    }
    let mut prefix = 0.0;
    let mut lhs = f64::INFINITY;
    let mut argmin = 0;
    for n in 0..=big_n {
        prefix += d_seq[n];
        let r = d_seq[n + 1] / prefix;
        if r <= lhs {
            lhs = r;
            argmin = n;
        }
    }
    let rhs = 4.0 * log2_plus(ratio) / count;
    Ok(BoundReport::inequality("min_ratio", lhs, rhs, INEQ_TOL)
        .with_context(format!("N={big_n}; argmin={argmin}")))
}
