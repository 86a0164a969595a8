use crate::problem::Problem;
use crate::rng::Rng;
use crate::vector::Vector;

/// `f(x) = |x|` in one dimension; `x* = 0`, `f* = 0`, `G = 1`.
///
/// The subgradient at 0 is 0, which triggers the zero-gradient exit when a
/// run starts at the minimizer.
#[derive(Debug, Clone, Default)]
pub struct AbsValueProblem {
    minimizer: [f64; 1],
}

impl AbsValueProblem {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Problem for AbsValueProblem {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        x[0].abs()
    }

    fn subgradient(&self, x: &[f64], _rng: &mut Rng) -> Vector {
        let g = if x[0] > 0.0 {
            1.0
        } else if x[0] < 0.0 {
            -1.0
        } else {
            0.0
        };
        vec![g]
    }

    fn known_minimizer(&self) -> Option<&[f64]> {
        Some(&self.minimizer)
    }

    fn known_fstar(&self) -> Option<f64> {
        Some(0.0)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(1.0)
    }

    fn lipschitz_inf(&self) -> Option<f64> {
        Some(1.0)
    }
}
