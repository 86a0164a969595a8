use serde::Serialize;

use crate::error::{Error, Result};

use super::config::{Algorithm, ExperimentConfig};
use super::experiment::{run_seeds, Aggregate};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub label: String,
    pub lr: Option<f64>,
    pub final_f: f64,
    pub two_se: f64,
    pub diverged: bool,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    /// Grid points in ascending learning-rate order.
    pub points: Vec<GridPoint>,
    pub best_lr: Option<f64>,
    /// The learning-rate-free comparison run, kept apart from the grid.
    pub reference: Option<GridPoint>,
}

impl GridResult {
    pub fn best(&self) -> Option<&GridPoint> {
        self.points.iter().find(|p| p.best)
    }

    /// Grid points followed by the reference row.
    pub fn table(&self) -> Vec<&GridPoint> {
        self.points.iter().chain(self.reference.as_ref()).collect()
    }
}

fn summarize(config: &ExperimentConfig, label: String, lr: Option<f64>) -> Result<GridPoint> {
    let runs = run_seeds(config)?;
    let diverged = runs.iter().any(|r| r.summary.diverged);
    let finals: Vec<f64> = runs.iter().map(|r| r.summary.final_f).collect();
    let agg = Aggregate::of("final_f", &finals);
    Ok(GridPoint {
        label,
        lr,
        final_f: agg.mean,
        two_se: agg.two_se,
        diverged: diverged || !agg.mean.is_finite(),
        best: false,
    })
}

/// Runs the baseline in `template` at each learning rate and picks the
/// lowest mean final loss; ties go to the smaller rate and diverged points
/// are never picked. `against` optionally adds a learning-rate-free run
/// on the same problem for comparison.
pub fn grid_search(template: &ExperimentConfig, lrs: &[f64], against: Option<Algorithm>) -> Result<GridResult> {
    if lrs.is_empty() {
        return Err(Error::config("learning-rate grid is empty"));
    }
    if !template.algorithm.uses_lr() {
        return Err(Error::config(format!(
            "{} has no learning rate to search over",
            template.algorithm
        )));
    }
    if let Some(a) = against {
        if !a.is_dadapt() {
            return Err(Error::config(format!("{a} is not a learning-rate-free method")));
        }
    }
    let mut lrs = lrs.to_vec();
    lrs.sort_by(f64::total_cmp);
    lrs.dedup();
    let mut points = Vec::with_capacity(lrs.len());
    for &lr in &lrs {
        let cfg = template.with_overrides(&[format!("lr={lr}")])?;
        points.push(summarize(&cfg, format!("{}@{lr}", template.algorithm), Some(lr))?);
    }
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        if p.diverged {
            continue;
        }
        if best.is_none_or(|b| p.final_f < points[b].final_f) {
            best = Some(i);
        }
    }
    if let Some(b) = best {
        points[b].best = true;
    }
    let reference = against
        .map(|a| {
            let cfg = template.with_overrides(&[format!("algorithm={a}")])?;
            summarize(&cfg, a.to_string(), None)
        })
        .transpose()?;
    Ok(GridResult {
        best_lr: best.map(|b| lrs[b]),
        points,
        reference,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub d0: f64,
    pub final_f: f64,
    pub two_se: f64,
    pub final_d: f64,
    pub diverged: bool,
    /// `d0` exceeds the known distance to the solution.
    pub out_of_theory: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// `(max − min)/min` of the mean final losses.
    pub spread: f64,
}

/// Runs `template` once per `d0` value (all seeds each).
pub fn d0_sweep(template: &ExperimentConfig, d0s: &[f64]) -> Result<SweepResult> {
    if d0s.is_empty() {
        return Err(Error::config("d0 list is empty"));
    }
    if !template.algorithm.is_dadapt() {
        return Err(Error::config(format!("{} does not use d0", template.algorithm)));
    }
    let mut points = Vec::with_capacity(d0s.len());
    for &d0 in d0s {
        let cfg = template.with_overrides(&[format!("d0={d0}")])?;
        let runs = run_seeds(&cfg)?;
        let finals: Vec<f64> = runs.iter().map(|r| r.summary.final_f).collect();
        let ds: Vec<f64> = runs.iter().map(|r| r.summary.final_d.unwrap_or(d0)).collect();
        let agg = Aggregate::of("final_f", &finals);
        points.push(SweepPoint {
            d0,
            final_f: agg.mean,
            two_se: agg.two_se,
            final_d: Aggregate::of("final_d", &ds).mean,
            diverged: runs.iter().any(|r| r.summary.diverged),
            out_of_theory: runs.iter().any(|r| r.summary.out_of_theory),
        });
    }
    let lo = points.iter().map(|p| p.final_f).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.final_f).fold(f64::NEG_INFINITY, f64::max);
    let spread = if hi == lo { 0.0 } else { (hi - lo) / lo.abs() };
    Ok(SweepResult { points, spread })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_fixed() -> ExperimentConfig {
        ExperimentConfig::parse("problem = abs\nx0 = 1\nalgorithm = fixed\nsteps = 100").unwrap()
    }

    #[test]
    fn grid_table_shape() {
        let r = grid_search(&abs_fixed(), &[10.0, 0.1, 1.0], Some(Algorithm::DaI)).unwrap();
        assert_eq!(r.points.len(), 3);
        assert_eq!(r.points[0].lr, Some(0.1));
        assert_eq!(r.points.iter().filter(|p| p.best).count(), 1);
        let reference = r.reference.as_ref().unwrap();
        assert_eq!(reference.lr, None);
        assert!(!reference.best);
        assert_eq!(r.table().len(), 4);
    }

    #[test]
    fn single_point_grid() {
        let r = grid_search(&abs_fixed(), &[1.0], None).unwrap();
        assert_eq!(r.best_lr, Some(1.0));
    }

    #[test]
    fn grid_rejects_learning_rate_free_template() {
        let t = abs_fixed().with_overrides(&["algorithm=da_I"]).unwrap();
        assert!(grid_search(&t, &[1.0], None).is_err());
        assert!(grid_search(&abs_fixed(), &[], None).is_err());
        assert!(grid_search(&abs_fixed(), &[1.0], Some(Algorithm::Adagrad)).is_err());
    }

    #[test]
    fn diverged_points_are_flagged_not_picked() {
        let r = grid_search(&abs_fixed(), &[1.0, 1e300], None).unwrap();
        assert!(r.points[1].diverged);
        assert_eq!(r.best_lr, Some(1.0));
    }

    #[test]
    fn ties_go_to_smaller_rate() {
        // both steps overshoot 0 by the same amount on |x| from x0 = 1 after one step
        let t = abs_fixed().with_overrides(&["steps=1", "algorithm=fixed"]).unwrap();
        let r = grid_search(&t, &[1.5, 0.5], None).unwrap();
        assert_eq!(r.points[0].final_f, r.points[1].final_f);
        assert_eq!(r.best_lr, Some(0.5));
    }

    #[test]
    fn sweep_single_and_out_of_theory() {
        let t = ExperimentConfig::parse("problem = abs\nx0 = 1\nalgorithm = da_I\nsteps = 200").unwrap();
        let s = d0_sweep(&t, &[0.1]).unwrap();
        assert_eq!(s.spread, 0.0);
        let s = d0_sweep(&t, &[10.0]).unwrap();
        assert!(s.points[0].out_of_theory);
        assert_eq!(s.points[0].final_d, 10.0);
    }
}
