//! Learning-rate multipliers `γₖ ∈ (0, 1]` layered on top of the adapted
//! step size. The base value is always 1.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Flat,
    /// Multiply by `factor` at each boundary `fraction * n_total` passed.
    Stagewise { fractions: Vec<f64>, factor: f64 },
    InverseSqrtWarmup { warmup: usize },
    Cosine,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Flat
    }
}

impl Schedule {
    /// The stage-wise schedule with 10-fold decreases at 60%, 80% and 95%.
    pub fn tenthing() -> Self {
        Schedule::Stagewise {
            fractions: vec![0.6, 0.8, 0.95],
            factor: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Schedule::Flat | Schedule::Cosine => Ok(()),
            Schedule::Stagewise { fractions, factor } => {
                if !(*factor > 0.0 && *factor <= 1.0) {
                    return Err(Error::config(format!(
                        "stagewise factor must lie in (0, 1], got {factor}"
                    )));
                }
                if fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
                    return Err(Error::config("stage fractions must lie in (0, 1)"));
                }
                if fractions.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::config("stage fractions must be strictly increasing"));
                }
                Ok(())
            }
            Schedule::InverseSqrtWarmup { warmup } => {
                if *warmup == 0 {
                    Err(Error::config("warmup must be positive"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Multiplier for step `k` out of `n_total`.
    pub fn eval(&self, k: usize, n_total: usize) -> Result<f64> {
        if n_total == 0 {
            return Err(Error::config("schedule needs n_total > 0"));
        }
        self.validate()?;
        Ok(match self {
            Schedule::Flat => 1.0,
            Schedule::Stagewise { fractions, factor } => {
                let passed = fractions
                    .iter()
                    .filter(|f| k as f64 >= *f * n_total as f64)
                    .count();
                factor.powi(passed as i32)
            }
            Schedule::InverseSqrtWarmup { warmup } => {
                // (k + 1) keeps the very first multiplier positive.
                let w = *warmup as f64;
                let ramp = ((k + 1) as f64 / w).min(1.0);
                let decay = (w / (k.max(1) as f64)).sqrt().min(1.0);
                ramp * decay
            }
            Schedule::Cosine => {
                let k = k.min(n_total - 1) as f64;
                0.5 * (1.0 + (PI * k / n_total as f64).cos())
            }
        })
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Flat => write!(f, "flat"),
            Schedule::Cosine => write!(f, "cosine"),
            Schedule::InverseSqrtWarmup { warmup } => write!(f, "invsqrt:{warmup}"),
            Schedule::Stagewise { fractions, factor } => {
                let fr: Vec<String> = fractions.iter().map(|x| x.to_string()).collect();
                write!(f, "stagewise:{}@{}", fr.join("/"), factor)
            }
        }
    }
}

/// Parses `flat`, `cosine`, `invsqrt:<warmup>`, `stagewise` (the 60/80/95
/// tenthing default) or `stagewise:<f1>/<f2>/...@<factor>`.
impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let schedule = match s {
            "flat" => Schedule::Flat,
            "cosine" => Schedule::Cosine,
            "stagewise" => Schedule::tenthing(),
            _ => {
                if let Some(rest) = s.strip_prefix("invsqrt:") {
                    let warmup = rest
                        .parse()
                        .map_err(|_| Error::config(format!("bad warmup in schedule {s:?}")))?;
                    Schedule::InverseSqrtWarmup { warmup }
                } else if let Some(rest) = s.strip_prefix("stagewise:") {
                    let (fr, factor) = rest
                        .split_once('@')
                        .ok_or_else(|| Error::config(format!("missing @factor in {s:?}")))?;
                    let fractions = fr
                        .split('/')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| Error::config(format!("bad fractions in {s:?}")))?;
                    let factor = factor
                        .trim()
                        .parse()
                        .map_err(|_| Error::config(format!("bad factor in {s:?}")))?;
                    Schedule::Stagewise { fractions, factor }
                } else {
                    return Err(Error::config(format!("unknown schedule {s:?}")));
                }
            }
        };
        schedule.validate()?;
        Ok(schedule)
    }
}
