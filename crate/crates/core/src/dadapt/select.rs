use crate::error::{Error, Result};

/// `t = argmin_{k ≤ n} dₖ₊₁ / Σᵢ≤ₖ dᵢ` over `d₀ … dₙ₊₁`; ties go to the
/// largest `k`.
pub fn select_return_index(d_seq: &[f64]) -> Result<usize> {
    if d_seq.len() < 2 {
        return Err(Error::precondition(
            "return-index selection needs at least d0 and d1",
        ));
    }
    let mut prefix = 0.0;
    let mut best = (0, f64::INFINITY);
    for k in 0..d_seq.len() - 1 {
        prefix += d_seq[k];
        let ratio = d_seq[k + 1] / prefix;
        if ratio <= best.1 {
            best = (k, ratio);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_minimum_ratio() {
        assert_eq!(select_return_index(&[1.0, 1.0, 1.0, 8.0]).unwrap(), 1);
    }

    #[test]
    fn constant_sequence_picks_last() {
        assert_eq!(select_return_index(&[2.0; 4]).unwrap(), 2);
    }

    #[test]
    fn single_candidate() {
        assert_eq!(select_return_index(&[0.5, 3.0]).unwrap(), 0);
    }

    #[test]
    fn ties_go_to_largest_index() {
        // ratios 1/1 and 2/2
        assert_eq!(select_return_index(&[1.0, 1.0, 2.0]).unwrap(), 1);
    }

    #[test]
    fn empty_is_error() {
        assert!(select_return_index(&[]).is_err());
        assert!(select_return_index(&[1.0]).is_err());
    }
}
