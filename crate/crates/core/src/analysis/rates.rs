use crate::dadapt::{ConvexMethod, ConvexRun, GMode};
use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::trajectory::Trajectory;
use crate::vector::distance;

use super::{BoundReport, INEQ_TOL};

/// Slack on the asymptotic level `D/(1+√3)` for finite runs, as a
/// fraction of `D`.
pub const DASYM_SLACK: f64 = 0.05;

/// `max(1, log₂ x)`.
pub fn log2_plus(x: f64) -> f64 {
    x.log2().max(1.0)
}

/// `D/(1+√3) − 0.05·D`.
pub fn dasym_threshold(big_d: f64) -> f64 {
    big_d / (1.0 + 3f64.sqrt()) - DASYM_SLACK * big_d
}

fn fstar(problem: &dyn Problem) -> Result<f64> {
    problem
        .known_fstar()
        .ok_or_else(|| Error::precondition("the problem has no known optimal value"))
}

/// Non-asymptotic rate at the selected iterate `x̂ₜ` of a dual averaging
/// run with `γₖ₊₁ = 1/√(G² + Σ‖gᵢ‖²)`. Returns the gradient-sum form and the
/// `DG/√(n+1)` form.
pub fn check_rate_theorem2(
    run: &ConvexRun,
    problem: &dyn Problem,
    big_d: f64,
    big_g: f64,
) -> Result<Vec<BoundReport>> {
    match run.method {
        ConvexMethod::DualAveraging {
            g_mode: GMode::Fixed(_),
            ..
        } => {}
        _ => {
            return Err(Error::precondition(
                "rate bound requires dual averaging with G in the step size",
            ))
        }
    }
    let fstar = fstar(problem)?;
    let traj = &run.trajectory;
    let Some(selected) = &run.selected else {
        return Err(Error::precondition("run has no selected iterate"));
    };
    let n = traj.len() - 1;
    let count = (n + 1) as f64;
    let d0 = traj.d0;
    if count - 1.0 < 2.0 * (big_d / d0).log2() {
        let reason = format!("n={n} < 2log2(D/d0)");
        return Ok(vec![
            BoundReport::skipped("rate_gradient_sum", reason.clone()),
            BoundReport::skipped("rate_dg", reason),
        ]);
    }
    let gap = problem.value(&selected.x) - fstar;
    let gsum: f64 = traj.records[..=selected.t].iter().map(|r| r.gnorm2).sum();
    let rhs1 = 16.0 * log2_plus(traj.final_d() / d0) / count * big_d * gsum.sqrt();
    let rhs2 = 16.0 * big_d * big_g * log2_plus(big_d / d0) / count.sqrt();
    let ctx = format!("n={n}; t={}", selected.t);
    Ok(vec![
        BoundReport::inequality("rate_gradient_sum", gap, rhs1, INEQ_TOL).with_context(&ctx),
        BoundReport::inequality("rate_dg", gap, rhs2, INEQ_TOL).with_context(&ctx),
    ])
}

/// `f(x̂ₙ) − f* ≤ 16DG/√(n+1) + 8DG²/((n+1)‖g₀‖)` at the full weighted
/// average of a dual averaging run with `γₖ₊₁ = 1/√Σ‖gᵢ‖²`.
pub fn check_rate_theorem1(
    run: &ConvexRun,
    problem: &dyn Problem,
    big_d: f64,
    big_g: f64,
) -> Result<BoundReport> {
    if !matches!(
        run.method,
        ConvexMethod::DualAveraging {
            g_mode: GMode::None,
            ..
        }
    ) {
        return Err(Error::precondition(
            "rate bound requires dual averaging with the plain step size",
        ));
    }
    let fstar = fstar(problem)?;
    let traj = &run.trajectory;
    let first = traj
        .records
        .first()
        .ok_or_else(|| Error::precondition("trajectory has no step records"))?;
    let n = traj.len() - 1;
    let count = (n + 1) as f64;
    let gap = problem.value(&run.x_hat) - fstar;
    let rhs = 16.0 * big_d * big_g / count.sqrt()
        + 8.0 * big_d * big_g * big_g / (count * first.gnorm2.sqrt());
    Ok(BoundReport::inequality("rate_plain_step", gap, rhs, INEQ_TOL).with_context(format!("n={n}")))
}

/// Asymptotic level of `d`: once `‖x_final − x*‖ ≤ 0.01·D`, the final `d`
/// must be at least `D/(1+√3) − 0.05·D`.
pub fn check_dasym(
    traj: &Trajectory,
    x_final: &[f64],
    minimizer: &[f64],
    big_d: f64,
) -> Result<BoundReport> {
    if traj.is_empty() {
        return Err(Error::precondition("trajectory has no step records"));
    }
    let dist = distance(x_final, minimizer);
    if dist > 0.01 * big_d {
        return Ok(BoundReport::skipped(
            "d_asymptotic",
            format!("not converged: ‖x−x*‖={dist:.3e} > 0.01·D"),
        ));
    }
    Ok(BoundReport::inequality(
        "d_asymptotic",
        dasym_threshold(big_d),
        traj.final_d(),
        INEQ_TOL,
    )
    .with_context(format!(
        "finite-run slack {DASYM_SLACK}·D below the limit D/(1+√3); ‖x−x*‖={dist:.3e}"
    )))
}
