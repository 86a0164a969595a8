use crate::error::{Error, Result};
use crate::trajectory::{RunKind, StepRecord, Trajectory};

use super::{BoundReport, IDENTITY_RTOL, INEQ_TOL};

const DOMINANCE_RTOL: f64 = 1e-12;

fn require_records(traj: &Trajectory) -> Result<&[StepRecord]> {
    if traj.records.is_empty() {
        return Err(Error::precondition("trajectory has no step records"));
    }
    Ok(&traj.records)
}

fn require_complete(traj: &Trajectory) -> Result<&[StepRecord]> {
    for (i, r) in traj.records.iter().enumerate() {
        if r.k != i {
            return Err(Error::precondition(format!(
                "step records are truncated: position {i} holds step {}",
                r.k
            )));
        }
    }
    Ok(&traj.records)
}

/// Every `d̂ₖ` stays below the true distance `D` (ℓ∞ distance for
/// D-Adapted AdaGrad).
pub fn check_d_lower_bound(traj: &Trajectory, big_d: f64) -> Result<BoundReport> {
    let records = require_records(traj)?;
    let (worst_k, worst) = records
        .iter()
        .map(|r| (r.k, r.dhat))
        .fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
    Ok(BoundReport::inequality("d_lower_bound", worst, big_d, INEQ_TOL)
        .with_context(format!("argmax_k={worst_k}")))
}

/// `dₖ ≤ max(d₀, D)` for every `k`.
pub fn check_d_envelope(traj: &Trajectory, big_d: f64) -> Result<BoundReport> {
    require_records(traj)?;
    let worst = traj.d_sequence().into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundReport::inequality(
        "d_envelope",
        worst,
        traj.d0.max(big_d),
        INEQ_TOL,
    ))
}

/// The inner-product expansion of the weighted gradient sum.
///
/// For dual averaging and gradient descent this is the exact identity
/// `−Σγₖwₖ⟨gₖ,sₖ⟩ = −γₙ₊₁‖sₙ₊₁‖²/2 + Σγₖwₖ²‖gₖ‖²/2 + Σ(γₖ₊₁−γₖ)‖sₖ₊₁‖²/2`.
/// For D-Adapted AdaGrad the metric shrinks over time and only the
/// inequality `−Σwₖ⟨gₖ,sₖ⟩_{Aₖ⁻¹} ≤ −‖sₙ₊₁‖²_{Aₙ₊₁⁻¹}/2 + Σwₖ²‖gₖ‖²_{Aₖ⁻¹}/2`
/// is available.
pub fn check_telescoping(traj: &Trajectory) -> Result<BoundReport> {
    let records = require_complete(traj)?;
    match traj.kind {
        RunKind::DualAveraging | RunKind::GradientDescent => {
            let Some(last) = records.last() else {
                return Ok(BoundReport::identity("telescoping", 0.0, 0.0, 0.0, IDENTITY_RTOL));
            };
            let mut lhs = 0.0;
            let mut grad_term = 0.0;
            let mut gamma_term = 0.0;
            let mut scale = 0.0;
            for r in records {
                let ip = r.gamma * r.weight * r.g_dot_s;
                let sq = 0.5 * r.gamma * r.weight * r.weight * r.gnorm2;
                let dg = 0.5 * (r.gamma_next - r.gamma) * r.s_metric2_next;
                lhs -= ip;
                grad_term += sq;
                gamma_term += dg;
                scale += ip.abs() + sq.abs() + dg.abs();
            }
            let head = 0.5 * last.gamma_next * last.s_metric2_next;
            scale += head.abs();
            let rhs = -head + grad_term + gamma_term;
            Ok(BoundReport::identity("telescoping", lhs, rhs, scale, IDENTITY_RTOL)
                .with_context(format!("steps={}", records.len())))
        }
        RunKind::AdaGrad => {
            let Some(last) = records.last() else {
                return Ok(BoundReport::inequality("telescoping_metric", 0.0, 0.0, INEQ_TOL));
            };
            let mut lhs = 0.0;
            let mut grad_term = 0.0;
            for r in records {
                lhs -= r.weight * r.g_dot_s;
                grad_term += 0.5 * r.weight * r.weight * r.g_metric2;
            }
            let rhs = -0.5 * last.s_metric2_next + grad_term;
            Ok(BoundReport::inequality("telescoping_metric", lhs, rhs, INEQ_TOL)
                .with_context(format!("steps={}", records.len())))
        }
        other => Err(Error::precondition(format!(
            "no inner-product expansion for {other:?} runs"
        ))),
    }
}

/// Bound on the accumulated gradient sum, checked after every step.
///
/// Dual averaging and gradient descent:
/// `‖sₙ₊₁‖ ≤ 2dₙ₊₁/γₙ₊₁ + Σγₖwₖ²‖gₖ‖²/(2dₙ₊₁)` (γ = 1 for gradient descent).
/// D-Adapted AdaGrad: `‖sₙ₊₁‖₁ ≤ 3dₙ₊₁‖aₙ₊₁‖₁`.
pub fn check_snorm_bound(traj: &Trajectory) -> Result<BoundReport> {
    let records = require_complete(traj)?;
    let name = match traj.kind {
        RunKind::DualAveraging | RunKind::GradientDescent => "snorm_bound",
        RunKind::AdaGrad => "snorm_bound_l1",
        other => {
            return Err(Error::precondition(format!(
                "no s-norm bound for {other:?} runs"
            )))
        }
    };
    let mut worst: Option<(usize, f64, f64)> = None;
    let mut grad_sum = 0.0;
    for r in records {
        let (lhs, rhs) = match traj.kind {
            RunKind::AdaGrad => {
                let a1 = r.a_norm1_next.ok_or_else(|| {
                    Error::precondition(format!("step {} lacks the ‖a‖₁ record", r.k))
                })?;
                (r.s_norm_next, 3.0 * r.d_next * a1)
            }
            _ => {
                grad_sum += r.gamma * r.weight * r.weight * r.gnorm2;
                (
                    r.s_norm_next,
                    2.0 * r.d_next / r.gamma_next + grad_sum / (2.0 * r.d_next),
                )
            }
        };
        if worst.is_none_or(|(_, l, h)| rhs - lhs < h - l) {
            worst = Some((r.k, lhs, rhs));
        }
    }
    let (k, lhs, rhs) = worst.unwrap_or((0, 0.0, 0.0));
    Ok(BoundReport::inequality(name, lhs, rhs, INEQ_TOL).with_context(format!("tightest_k={k}")))
}

/// Option II's numerator dominates Option I's at every prefix. Both
/// streams must come from the same run.
pub fn check_option_dominance(opt1: &[f64], opt2: &[f64]) -> Result<BoundReport> {
    dominance(opt1, opt2, None)
}

/// `scales[k]` is the magnitude of the terms whose difference forms the
/// Option I numerator; the relative tolerance applies against the larger
/// of it and the numerators themselves.
fn dominance(opt1: &[f64], opt2: &[f64], scales: Option<&[f64]>) -> Result<BoundReport> {
    if opt1.len() != opt2.len() || scales.is_some_and(|s| s.len() != opt1.len()) {
        return Err(Error::precondition(format!(
            "numerator streams differ in length: {} vs {}",
            opt1.len(),
            opt2.len()
        )));
    }
    let mut worst: Option<(usize, f64, f64, f64)> = None;
    for (k, (&n1, &n2)) in opt1.iter().zip(opt2).enumerate() {
        let term_scale = scales.map_or(0.0, |s| s[k]);
        let scale = n1.abs().max(n2.abs()).max(term_scale);
        let excess = (n1 - n2) / if scale > 0.0 { scale } else { 1.0 };
        if worst.is_none_or(|w| excess > w.3) {
            worst = Some((k, n1, n2, excess));
        }
    }
    let Some((k, n1, n2, excess)) = worst else {
        return Ok(BoundReport::inequality("option_dominance", 0.0, 0.0, 0.0));
    };
    let ok = excess <= DOMINANCE_RTOL;
    let mut report = BoundReport::inequality("option_dominance", n1, n2, 0.0)
        .with_context(format!("tightest_k={k}; relative_excess={excess:.3e}"));
    report.outcome = if ok {
        super::Outcome::Satisfied
    } else {
        super::Outcome::Violated
    };
    Ok(report)
}

/// [`check_option_dominance`] on the numerators recorded in a run.
pub fn check_option_dominance_run(traj: &Trajectory) -> Result<BoundReport> {
    let records = require_complete(traj)?;
    let opt1: Vec<f64> = records.iter().map(|r| r.numer_opt1).collect();
    let opt2: Vec<f64> = records.iter().map(|r| r.numer_opt2).collect();
    // numer_opt1 = (P − Q)/2 with P = γₙ₊₁‖sₙ₊₁‖² and Q = P − 2·numer_opt1
    let scales: Vec<f64> = records
        .iter()
        .map(|r| {
            let p = r.gamma_next * r.s_metric2_next;
            0.5 * (p + (p - 2.0 * r.numer_opt1).abs())
        })
        .collect();
    dominance(&opt1, &opt2, Some(&scales))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dadapt::{DAdaptAdaGrad, DOption, DualAveraging, GMode};

    fn abs_grad(x: f64) -> f64 {
        if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    fn abs_da_run(steps: usize, option: DOption) -> Trajectory {
        let mut st = DualAveraging::new(vec![1.0], 0.1, option, GMode::None).unwrap();
        let mut traj = Trajectory::new(RunKind::DualAveraging, 1, 0.1);
        for _ in 0..steps {
            let g = [abs_grad(st.x()[0])];
            traj.push(st.step(&g).unwrap());
        }
        traj
    }

    #[test]
    fn lower_bound_on_abs() {
        let traj = abs_da_run(500, DOption::I);
        let r = check_d_lower_bound(&traj, 1.0).unwrap();
        assert!(r.satisfied(), "{r}");
        assert!(check_d_envelope(&traj, 1.0).unwrap().satisfied());
    }

    #[test]
    fn single_step_has_full_slack() {
        let traj = abs_da_run(1, DOption::I);
        let r = check_d_lower_bound(&traj, 1.0).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.slack, 1.0);
    }

    #[test]
    fn missing_records_error() {
        let traj = Trajectory::new(RunKind::DualAveraging, 1, 0.1);
        assert!(check_d_lower_bound(&traj, 1.0).is_err());
    }

    #[test]
    fn flat_weight_identity() {
        // constant γ and unit weights
        let gamma = 0.3;
        let gs = [1.0, -2.0, 0.5, 0.25];
        let mut traj = Trajectory::new(RunKind::DualAveraging, 1, 1.0);
        let mut s = 0.0;
        for (k, &g) in gs.iter().enumerate() {
            let g_dot_s = g * s;
            s += g;
            traj.push(StepRecord {
                k,
                d: 1.0,
                d_next: 1.0,
                gamma,
                gamma_next: gamma,
                weight: 1.0,
                gnorm2: g * g,
                g_dot_s,
                s_metric2_next: s * s,
                ..Default::default()
            });
        }
        let r = check_telescoping(&traj).unwrap();
        let lhs = -gamma * (0.0 + -2.0 * 1.0 + 0.5 * -1.0 + 0.25 * -0.5);
        let rhs = -gamma / 2.0 * s * s + gamma / 2.0 * gs.iter().map(|g| g * g).sum::<f64>();
        assert!((r.lhs - lhs).abs() < 1e-15);
        assert!((r.rhs - rhs).abs() < 1e-15);
        assert!(r.satisfied());
    }

    #[test]
    fn empty_identity_is_zero() {
        let traj = Trajectory::new(RunKind::DualAveraging, 1, 1.0);
        let r = check_telescoping(&traj).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.satisfied());
    }

    #[test]
    fn identity_on_abs_run() {
        let traj = abs_da_run(200, DOption::I);
        let r = check_telescoping(&traj).unwrap();
        let residual = (r.lhs - r.rhs).abs() / r.lhs.abs().max(r.rhs.abs());
        assert!(residual < 1e-10, "{r}");
    }

    #[test]
    fn truncated_records_error() {
        let mut traj = abs_da_run(5, DOption::I);
        traj.records.remove(2);
        assert!(check_telescoping(&traj).is_err());
    }

    #[test]
    fn snorm_first_step() {
        let traj = abs_da_run(1, DOption::I);
        let r = check_snorm_bound(&traj).unwrap();
        assert!((r.lhs - 0.1).abs() < 1e-15);
        assert!((r.rhs - 0.25).abs() < 1e-12);
        assert!(r.satisfied());
    }

    #[test]
    fn snorm_l1_first_step() {
        let mut st = DAdaptAdaGrad::new(vec![1.0], 0.1, 1.0).unwrap();
        let mut traj = Trajectory::new(RunKind::AdaGrad, 1, 0.1);
        traj.push(st.step(&[1.0], 1.0).unwrap());
        let r = check_snorm_bound(&traj).unwrap();
        assert!((r.lhs - 0.1).abs() < 1e-15);
        assert!((r.rhs - 0.3 * 2f64.sqrt()).abs() < 1e-12);
        assert!(r.satisfied());
        assert!(check_telescoping(&traj).unwrap().satisfied());
    }

    #[test]
    fn snorm_wrong_kind() {
        let mut traj = Trajectory::new(RunKind::Adam, 1, 0.1);
        traj.push(StepRecord::default());
        assert!(check_snorm_bound(&traj).is_err());
    }

    #[test]
    fn dominance_hand_trace() {
        let traj = abs_da_run(2, DOption::I);
        assert_eq!(traj.records[0].numer_opt1, 0.0);
        assert_eq!(traj.records[0].numer_opt2, 0.0);
        let r1 = &traj.records[1];
        assert!((r1.numer_opt2 - 0.01).abs() < 1e-15);
        assert!((r1.numer_opt1 - 0.004_142_135_6).abs() < 1e-9);
        assert!(check_option_dominance_run(&traj).unwrap().satisfied());
    }

    #[test]
    fn dominance_violation_and_mismatch() {
        assert!(!check_option_dominance(&[0.0, 2.0], &[0.0, 1.0]).unwrap().satisfied());
        assert!(check_option_dominance(&[0.0], &[0.0, 1.0]).is_err());
    }
}
