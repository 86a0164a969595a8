use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::rng::Rng;
use crate::vector::{dot, norm2, norm_inf, Vector};

/// `f(x) = maxᵢ (⟨aᵢ, x⟩ + bᵢ)` with a planted minimizer.
///
/// [`PiecewiseMaxProblem::random`] draws pieces whose normals average to
/// zero and which all pass through `(x*, 0)`, so `x*` minimizes `f` with
/// `f* = 0`. A few extra pieces sit strictly below zero at `x*`.
#[derive(Debug, Clone)]
pub struct PiecewiseMaxProblem {
    normals: Vec<Vector>,
    offsets: Vec<f64>,
    minimizer: Vector,
    fstar: f64,
    lipschitz: f64,
    lipschitz_inf: f64,
}

impl PiecewiseMaxProblem {
    /// Builds a problem from explicit pieces and a minimizer the caller
    /// vouches for.
    pub fn new(normals: Vec<Vector>, offsets: Vec<f64>, minimizer: Vector) -> Result<Self> {
        if normals.is_empty() || normals.len() != offsets.len() {
            return Err(Error::config("need one offset per piece and at least one piece"));
        }
        let dim = minimizer.len();
        if normals.iter().any(|a| a.len() != dim) {
            return Err(Error::config("piece normals must match the minimizer dimension"));
        }
        let mut p = Self {
            lipschitz: normals.iter().map(|a| norm2(a)).fold(0.0, f64::max),
            lipschitz_inf: normals.iter().map(|a| norm_inf(a)).fold(0.0, f64::max),
            normals,
            offsets,
            fstar: 0.0,
            minimizer,
        };
        p.fstar = p.value(&p.minimizer);
        Ok(p)
    }

    /// `active` pieces through `(x*, 0)` plus `inactive` pieces below it,
    /// in `dim` dimensions with `x*` drawn from `N(0, scale²)`.
    pub fn random(dim: usize, active: usize, inactive: usize, scale: f64, rng: &mut Rng) -> Result<Self> {
        if dim == 0 || active < 2 {
            return Err(Error::config("piecewise problem needs dim >= 1 and >= 2 active pieces"));
        }
        let gauss = |rng: &mut Rng| -> Vector {
            (0..dim).map(|_| StandardNormal.sample(rng)).collect()
        };
        let minimizer: Vector = gauss(rng).into_iter().map(|v: f64| v * scale).collect();
        let mut normals: Vec<Vector> = (0..active - 1).map(|_| gauss(rng)).collect();
        let mut closing = vec![0.0; dim];
        for a in &normals {
            crate::vector::axpy(-1.0, a, &mut closing);
        }
        normals.push(closing);
        let mut offsets: Vec<f64> = normals.iter().map(|a| -dot(a, &minimizer)).collect();
        for _ in 0..inactive {
            let a = gauss(rng);
            let gap = 0.1 + rng.random::<f64>();
            offsets.push(-dot(&a, &minimizer) - gap);
            normals.push(a);
        }
        Self::new(normals, offsets, minimizer)
    }

    pub fn pieces(&self) -> usize {
        self.normals.len()
    }

    fn argmax(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, (a, b)) in self.normals.iter().zip(&self.offsets).enumerate() {
            let v = dot(a, x) + b;
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }
}

impl Problem for PiecewiseMaxProblem {
    fn dim(&self) -> usize {
        self.minimizer.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.argmax(x).1
    }

    fn subgradient(&self, x: &[f64], _rng: &mut Rng) -> Vector {
        self.normals[self.argmax(x).0].clone()
    }

    fn known_minimizer(&self) -> Option<&[f64]> {
        Some(&self.minimizer)
    }

    fn known_fstar(&self) -> Option<f64> {
        Some(self.fstar)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    fn lipschitz_inf(&self) -> Option<f64> {
        Some(self.lipschitz_inf)
    }
}
