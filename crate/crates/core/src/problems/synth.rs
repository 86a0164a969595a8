use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

use super::dataset::{Dataset, Example};

/// Parameters of a synthetic binary classification set.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    pub n: usize,
    pub dim: usize,
    /// Each point is pushed `margin` along the true normal towards its own
    /// side, so larger values give cleaner separation.
    pub margin: f64,
    /// Probability of flipping a label after placement.
    pub noise: f64,
}

/// Dense Gaussian features labelled by a random hyperplane through the
/// origin, with margin and label noise controls.
pub fn synth_dataset(spec: &SynthSpec) -> Result<Dataset> {
    if spec.n < 2 || spec.dim == 0 {
        return Err(Error::config("synthetic data needs n >= 2 and dim >= 1"));
    }
    if !(0.0..=0.5).contains(&spec.noise) {
        return Err(Error::config("label noise must lie in [0, 0.5]"));
    }
    let mut rng = seeded_rng(spec.seed, 0x5eed);
    let mut normal: Vec<f64> = (0..spec.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let len = crate::vector::norm2(&normal);
    normal.iter_mut().for_each(|v| *v /= len);

    let examples = (0..spec.n)
        .map(|_| {
            let mut x: Vec<f64> = (0..spec.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let side = if crate::vector::dot(&x, &normal) >= 0.0 { 1.0 } else { -1.0 };
            crate::vector::axpy(side * spec.margin, &normal, &mut x);
            let flip = rng.random::<f64>() < spec.noise;
            Example {
                features: x.into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect(),
                label: if flip { -side } else { side },
            }
        })
        .collect();
    Ok(Dataset::new(examples))
}
