use std::sync::Arc;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::rng::Rng;
use crate::vector::Vector;

use super::dataset::Dataset;

/// Binary logistic regression, `mean log(1 + exp(−y⟨w, x⟩))`.
///
/// The weight vector has one more entry than the dataset has features: the
/// last coordinate multiplies an implicit always-1 bias feature. No
/// regularization is applied.
#[derive(Debug, Clone)]
pub struct LogisticProblem {
    data: Arc<Dataset>,
    batch_size: usize,
}

impl LogisticProblem {
    pub fn new(data: Arc<Dataset>, batch_size: usize) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::config("logistic problem needs a non-empty dataset"));
        }
        if batch_size == 0 {
            return Err(Error::config("batch size must be positive"));
        }
        Ok(Self { data, batch_size })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn full_batch(&self) -> Vec<usize> {
        (0..self.data.len()).collect()
    }

    /// Epoch-shuffling batch iterator over this problem's examples.
    pub fn sampler(&self, rng: Rng) -> BatchSampler {
        BatchSampler::new(self.data.len(), self.batch_size, rng)
    }
}

/// `log(1 + eᶻ)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// `1 / (1 + eᶻ)` without overflow.
fn sigmoid_neg(z: f64) -> f64 {
    if z >= 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// Mean loss and gradient over `batch`.
pub fn logistic_value_grad(p: &LogisticProblem, w: &[f64], batch: &[usize]) -> Result<(f64, Vector)> {
    let dim = p.data.dim + 1;
    if w.len() != dim {
        return Err(Error::precondition(format!(
            "weights have dimension {}, expected {dim}",
            w.len()
        )));
    }
    if batch.is_empty() {
        return Err(Error::precondition("empty batch"));
    }
    let mut value = 0.0;
    let mut grad = vec![0.0; dim];
    for &i in batch {
        let ex = p.data.examples.get(i).ok_or_else(|| {
            Error::precondition(format!("example index {i} out of range"))
        })?;
        let margin = ex.label * (ex.dot(w) + w[dim - 1]);
        value += softplus(-margin);
        let coef = -ex.label * sigmoid_neg(margin);
        for &(j, v) in &ex.features {
            grad[j - 1] += coef * v;
        }
        grad[dim - 1] += coef;
    }
    let m = batch.len() as f64;
    grad.iter_mut().for_each(|g| *g /= m);
    Ok((value / m, grad))
}

impl Problem for LogisticProblem {
    fn dim(&self) -> usize {
        self.data.dim + 1
    }

    fn value(&self, x: &[f64]) -> f64 {
        logistic_value_grad(self, x, &self.full_batch())
            .map(|(v, _)| v)
            .unwrap_or(f64::NAN)
    }

    /// Full-batch gradient; mini-batches go through [`BatchSampler`].
    fn subgradient(&self, x: &[f64], _rng: &mut Rng) -> Vector {
        logistic_value_grad(self, x, &self.full_batch())
            .map(|(_, g)| g)
            .unwrap_or_else(|_| vec![f64::NAN; self.dim()])
    }
}

/// Shuffles `0..n` afresh at the start of each epoch and hands it out in
/// chunks of `batch_size`; the last chunk of an epoch may be short.
#[derive(Debug, Clone)]
pub struct BatchSampler {
    perm: Vec<usize>,
    batch_size: usize,
    pos: usize,
    epoch: usize,
    rng: Rng,
}

impl BatchSampler {
    pub fn new(n: usize, batch_size: usize, rng: Rng) -> Self {
        Self {
            perm: (0..n).collect(),
            batch_size: batch_size.clamp(1, n.max(1)),
            pos: n,
            epoch: 0,
            rng,
        }
    }

    pub fn batches_per_epoch(&self) -> usize {
        self.perm.len().div_ceil(self.batch_size)
    }

    /// Number of epochs started so far.
    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn next_batch(&mut self) -> Vec<usize> {
        let n = self.perm.len();
        if n == 0 {
            return Vec::new();
        }
        if self.pos >= n {
            self.perm.shuffle(&mut self.rng);
            self.pos = 0;
            self.epoch += 1;
        }
        let end = (self.pos + self.batch_size).min(n);
        let batch = self.perm[self.pos..end].to_vec();
        self.pos = end;
        batch
    }
}
