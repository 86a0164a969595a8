//! Tuned or oracle-informed reference methods.

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::rng::Rng;
use crate::vector::{axpy, distance, norm2_sq, Vector};

/// Running state of AdaGrad-Norm.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdaGradNormAcc {
    pub sum_gsq: f64,
}

/// One AdaGrad-Norm step `x − γg` with `γ = mult·D/√Σ‖gᵢ‖²`, projected back
/// onto the ball of radius `D` around `center`. Returns `x` unchanged while
/// every gradient so far has been zero.
pub fn adagrad_norm_step(
    x: &[f64],
    g: &[f64],
    center: &[f64],
    big_d: f64,
    mult: f64,
    acc: &mut AdaGradNormAcc,
) -> Vector {
    acc.sum_gsq += norm2_sq(g);
    if acc.sum_gsq == 0.0 {
        return x.to_vec();
    }
    let gamma = mult * big_d / acc.sum_gsq.sqrt();
    let mut out = x.to_vec();
    axpy(-gamma, g, &mut out);
    project_ball(&mut out, center, big_d);
    out
}

fn project_ball(x: &mut [f64], center: &[f64], radius: f64) {
    let dist = distance(x, center);
    if dist > radius {
        let shrink = radius / dist;
        for (xi, ci) in x.iter_mut().zip(center) {
            *xi = ci + (*xi - ci) * shrink;
        }
    }
}

/// `x − γg` with the Polyak step `γ = (f(x) − f*)/‖g‖²`.
pub fn polyak_step(x: &[f64], g: &[f64], fx: f64, fstar: f64) -> Result<Vector> {
    if fx < fstar {
        return Err(Error::Invariant(format!(
            "f(x) = {fx} is below the stated optimum {fstar}"
        )));
    }
    if fx == fstar {
        return Ok(x.to_vec());
    }
    let gsq = norm2_sq(g);
    if gsq == 0.0 {
        return Err(Error::precondition("zero subgradient at a non-optimal point"));
    }
    let mut out = x.to_vec();
    axpy(-(fx - fstar) / gsq, g, &mut out);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedStepRun {
    /// Uniform average of `x₀, …, xₙ₋₁`.
    pub x_hat: Vector,
    pub x_last: Vector,
    pub step: f64,
}

/// `n` subgradient steps of constant size `D/(G√n)`.
pub fn fixed_step_run(
    problem: &dyn Problem,
    x0: &[f64],
    big_d: f64,
    big_g: f64,
    n: usize,
    rng: &mut Rng,
) -> Result<FixedStepRun> {
    if n == 0 || !(big_d > 0.0) || !(big_g > 0.0) {
        return Err(Error::config("fixed step run needs n >= 1 and positive D, G"));
    }
    let step = big_d / (big_g * (n as f64).sqrt());
    let mut x = x0.to_vec();
    let mut sum = vec![0.0; x0.len()];
    for _ in 0..n {
        axpy(1.0, &x, &mut sum);
        let g = problem.subgradient(&x, rng);
        axpy(-step, &g, &mut x);
    }
    Ok(FixedStepRun {
        x_hat: sum.iter().map(|v| v / n as f64).collect(),
        x_last: x,
        step,
    })
}

/// Diagonal AdaGrad `x ← x − lr·g/(√Σg² + ε)` with a zero initial
/// accumulator.
#[derive(Debug, Clone)]
pub struct AdaGrad {
    x: Vector,
    acc: Vector,
    lr: f64,
    eps: f64,
}

impl AdaGrad {
    pub const DEFAULT_EPS: f64 = 1e-10;

    pub fn new(x0: Vector, lr: f64, eps: f64) -> Result<Self> {
        if !(lr > 0.0 && eps > 0.0) {
            return Err(Error::config("AdaGrad needs positive lr and eps"));
        }
        let dim = x0.len();
        Ok(Self {
            x: x0,
            acc: vec![0.0; dim],
            lr,
            eps,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Step with learning rate `lr·mult`.
    pub fn step(&mut self, g: &[f64], mult: f64) {
        let lr = self.lr * mult;
        for ((xi, ai), gi) in self.x.iter_mut().zip(self.acc.iter_mut()).zip(g) {
            *ai += gi * gi;
            *xi -= lr * gi / (ai.sqrt() + self.eps);
        }
    }
}
