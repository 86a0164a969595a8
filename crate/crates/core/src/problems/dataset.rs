/// One labeled sparse example. Feature indices are 1-based and strictly
/// ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: Vec<(usize, f64)>,
    /// Always `-1.0` or `+1.0`.
    pub label: f64,
}

impl Example {
    /// `⟨w, x⟩` where `w` is indexed from 0 (feature `i` ↦ `w[i - 1]`).
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.features.iter().map(|&(i, v)| w[i - 1] * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub examples: Vec<Example>,
    /// Largest feature index present.
    pub dim: usize,
}

impl Dataset {
    pub fn new(examples: Vec<Example>) -> Self {
        let dim = examples
            .iter()
            .filter_map(|e| e.features.last().map(|&(i, _)| i))
            .max()
            .unwrap_or(0);
        Self { examples, dim }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}
