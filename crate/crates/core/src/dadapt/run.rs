use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::rng::seeded_rng;
use crate::trajectory::{RunKind, StepRecord, Trajectory};
use crate::vector::{norm2_sq, Vector};

use super::{select_return_index, DAdaptAdaGrad, DAdaptGd, DOption, DualAveraging, GMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvexMethod {
    DualAveraging { option: DOption, g_mode: GMode },
    GradientDescent { lipschitz: f64 },
    AdaGrad { lipschitz_inf: f64 },
}

impl ConvexMethod {
    pub fn kind(&self) -> RunKind {
        match self {
            ConvexMethod::DualAveraging { .. } => RunKind::DualAveraging,
            ConvexMethod::GradientDescent { .. } => RunKind::GradientDescent,
            ConvexMethod::AdaGrad { .. } => RunKind::AdaGrad,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvexConfig {
    pub method: ConvexMethod,
    pub d0: f64,
    /// Number of gradient evaluations; the last step has index `steps - 1`.
    pub steps: usize,
    /// Seeds the oracle's random stream (ignored by deterministic problems).
    pub seed: u64,
    /// Record `f(xₖ)` every this many steps (0 disables).
    pub record_every: usize,
}

impl ConvexConfig {
    pub fn new(method: ConvexMethod, d0: f64, steps: usize) -> Self {
        Self {
            method,
            d0,
            steps,
            seed: 0,
            record_every: 1,
        }
    }
}

/// The weighted average over the prefix `0..=t` chosen by
/// [`select_return_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedIterate {
    pub t: usize,
    pub x: Vector,
}

#[derive(Debug, Clone)]
pub struct ConvexRun {
    pub method: ConvexMethod,
    pub trajectory: Trajectory,
    /// Weighted average over all steps (`x0` when the run exits at once).
    pub x_hat: Vector,
    /// `xₙ₊₁`, the point after the final step.
    pub x_last: Vector,
    pub selected: Option<SelectedIterate>,
    /// The first gradient was zero, so `x0` is optimal and no step was taken.
    pub exited_at_start: bool,
}

enum Stepper {
    Da(DualAveraging),
    Gd(DAdaptGd),
    Ada(DAdaptAdaGrad),
}

impl Stepper {
    fn x(&self) -> &[f64] {
        match self {
            Stepper::Da(s) => s.x(),
            Stepper::Gd(s) => s.x(),
            Stepper::Ada(s) => s.x(),
        }
    }

    fn step(&mut self, g: &[f64]) -> Result<StepRecord> {
        match self {
            Stepper::Da(s) => s.step(g),
            Stepper::Gd(s) => s.step(g),
            Stepper::Ada(s) => s.step(g, 1.0),
        }
    }
}

/// Runs one of the convex D-Adaptation methods for `config.steps` steps.
///
/// The Theorem-style iterate `x̂ₜ` is computed for every method; its rate
/// guarantee is only proven for dual averaging with `GMode::Fixed`.
pub fn run_convex(problem: &dyn Problem, x0: &[f64], config: &ConvexConfig) -> Result<ConvexRun> {
    if config.steps == 0 {
        return Err(Error::config("run needs at least one step"));
    }
    if x0.len() != problem.dim() {
        return Err(Error::config(format!(
            "x0 has dimension {}, problem has {}",
            x0.len(),
            problem.dim()
        )));
    }
    let mut stepper = match config.method {
        ConvexMethod::DualAveraging { option, g_mode } => {
            Stepper::Da(DualAveraging::new(x0.to_vec(), config.d0, option, g_mode)?)
        }
        ConvexMethod::GradientDescent { lipschitz } => {
            Stepper::Gd(DAdaptGd::new(x0.to_vec(), config.d0, lipschitz)?)
        }
        ConvexMethod::AdaGrad { lipschitz_inf } => {
            Stepper::Ada(DAdaptAdaGrad::new(x0.to_vec(), config.d0, lipschitz_inf)?)
        }
    };
    let mut rng = seeded_rng(config.seed, 0);
    let mut trajectory = Trajectory::new(config.method.kind(), x0.len(), config.d0);
    let mut iterates: Vec<Vector> = Vec::with_capacity(config.steps);

    for k in 0..config.steps {
        let x = stepper.x().to_vec();
        let g = problem.subgradient(&x, &mut rng);
        if k == 0 && norm2_sq(&g) == 0.0 {
            return Ok(ConvexRun {
                method: config.method,
                trajectory,
                x_hat: x0.to_vec(),
                x_last: x0.to_vec(),
                selected: None,
                exited_at_start: true,
            });
        }
        let mut record = stepper.step(&g)?;
        if config.record_every > 0 && k % config.record_every == 0 && problem.cheap_value() {
            record.f = Some(problem.value(&x));
        }
        trajectory.weighted_average_update(&x, record.weight);
        trajectory.push(record);
        iterates.push(x);
    }

    let t = select_return_index(&trajectory.d_sequence())?;
    let mut num = vec![0.0; x0.len()];
    let mut den = 0.0;
    for (rec, x) in trajectory.records.iter().zip(&iterates).take(t + 1) {
        crate::vector::axpy(rec.weight, x, &mut num);
        den += rec.weight;
    }
    let selected = SelectedIterate {
        t,
        x: num.iter().map(|v| v / den).collect(),
    };
    Ok(ConvexRun {
        method: config.method,
        x_hat: trajectory.average().unwrap_or_else(|| x0.to_vec()),
        x_last: stepper.x().to_vec(),
        trajectory,
        selected: Some(selected),
        exited_at_start: false,
    })
}
