use std::sync::Arc;

use serde::Serialize;

use crate::dadapt::{select_return_index, DAdaptAdaGrad, DAdaptGd, DOption, DualAveraging, GMode};
use crate::error::{Error, Result};
use crate::ml::{AdamConfig, DAdaptAdam, DAdaptSgd};
use crate::problem::Problem;
use crate::problems::{
    logistic_value_grad, read_libsvm, synth_dataset, AbsValueProblem, BatchSampler, LogisticProblem,
    PiecewiseMaxProblem,
};
use crate::rng::{seeded_rng, Rng};
use crate::trajectory::StepRecord;
use crate::vector::{axpy, distance, norm2, norm_inf, Vector};

use super::baselines::{adagrad_norm_step, polyak_step, AdaGrad, AdaGradNormAcc};
use super::config::{Algorithm, ExperimentConfig, GModeSpec, ProblemSpec};

/// Iterates with a norm above this count as diverged.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// One CSV row per recorded step, plus a terminal row at `step = steps`
/// holding the final iterate's `f` and `d` (its `dhat`, `gamma_or_lambda`
/// and `gnorm2` are empty).
///
/// `elapsed` counts work, not time: oracle calls for deterministic
/// problems, examples processed for datasets. It keeps output files
/// byte-identical across reruns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub step: usize,
    pub d: Option<f64>,
    pub dhat: Option<f64>,
    pub gamma_or_lambda: Option<f64>,
    pub f: f64,
    pub gnorm2: Option<f64>,
    pub elapsed: u64,
}

pub const CSV_HEADER: [&str; 7] = ["step", "d", "dhat", "gamma_or_lambda", "f", "gnorm2", "elapsed"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedSummary {
    pub run_id: String,
    pub seed: u64,
    pub algorithm: String,
    pub steps: usize,
    /// Objective at the last iterate.
    pub final_f: f64,
    pub final_d: Option<f64>,
    /// Objective at the weighted (or uniform) average iterate.
    pub f_average: Option<f64>,
    pub selected_t: Option<usize>,
    pub f_selected: Option<f64>,
    pub diverged: bool,
    /// `G` or `G∞` was estimated from the first gradient.
    pub heuristic: bool,
    /// `d0` exceeds the known distance to the solution.
    pub out_of_theory: bool,
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub rows: Vec<CsvRow>,
    pub summary: SeedSummary,
    pub x_last: Vector,
}

/// A problem built from a config, shared by all seeds.
pub struct Instance {
    kind: InstanceKind,
}

enum InstanceKind {
    Convex(Box<dyn Problem>),
    Dataset(LogisticProblem),
}

impl Instance {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        let kind = match &config.problem {
            ProblemSpec::Abs => InstanceKind::Convex(Box::new(AbsValueProblem::new())),
            ProblemSpec::Piecewise {
                dim,
                active,
                inactive,
                scale,
                instance_seed,
            } => {
                let mut rng = seeded_rng(*instance_seed, 0x9ece);
                InstanceKind::Convex(Box::new(PiecewiseMaxProblem::random(
                    *dim, *active, *inactive, *scale, &mut rng,
                )?))
            }
            ProblemSpec::Synth(spec) => InstanceKind::Dataset(LogisticProblem::new(
                Arc::new(synth_dataset(spec)?),
                config.batch_size,
            )?),
            ProblemSpec::Libsvm(path) => {
                let data = read_libsvm(path)?;
                if data.is_empty() {
                    return Err(Error::config(format!("{} holds no examples", path.display())));
                }
                InstanceKind::Dataset(LogisticProblem::new(Arc::new(data), config.batch_size)?)
            }
        };
        Ok(Self { kind })
    }

    pub fn problem(&self) -> &dyn Problem {
        match &self.kind {
            InstanceKind::Convex(p) => p.as_ref(),
            InstanceKind::Dataset(p) => p,
        }
    }

    pub fn dim(&self) -> usize {
        self.problem().dim()
    }

    fn steps_per_epoch(&self) -> usize {
        match &self.kind {
            InstanceKind::Convex(_) => 1,
            InstanceKind::Dataset(p) => p.data().len().div_ceil(p.batch_size()),
        }
    }

    fn total_steps(&self, config: &ExperimentConfig) -> usize {
        match (&self.kind, config.steps) {
            (_, Some(steps)) => steps,
            (InstanceKind::Convex(_), None) => 1000,
            (InstanceKind::Dataset(_), None) => config.epochs.unwrap_or(100) * self.steps_per_epoch(),
        }
    }
}

enum Oracle<'a> {
    Convex(&'a dyn Problem),
    Dataset(&'a LogisticProblem, BatchSampler),
}

impl Oracle<'_> {
    /// Gradient at `x` and the work it cost.
    fn gradient(&mut self, x: &[f64], rng: &mut Rng) -> Result<(Vector, u64)> {
        match self {
            Oracle::Convex(p) => Ok((p.subgradient(x, rng), 1)),
            Oracle::Dataset(p, sampler) => {
                let batch = sampler.next_batch();
                let (_, g) = logistic_value_grad(p, x, &batch)?;
                Ok((g, batch.len() as u64))
            }
        }
    }
}

struct Outcome {
    d: Option<f64>,
    d_next: Option<f64>,
    dhat: Option<f64>,
    scale: f64,
    avg_weight: f64,
}

impl Outcome {
    fn from_record(r: &StepRecord, averaged: bool) -> Self {
        Self {
            d: Some(r.d),
            d_next: Some(r.d_next),
            dhat: Some(r.dhat),
            scale: r.scale,
            avg_weight: if averaged { r.weight } else { 0.0 },
        }
    }

    fn plain(scale: f64, avg_weight: f64) -> Self {
        Self {
            d: None,
            d_next: None,
            dhat: None,
            scale,
            avg_weight,
        }
    }
}

enum Optimizer {
    Da(DualAveraging),
    Gd(DAdaptGd),
    AdagradDa(DAdaptAdaGrad),
    Sgd(DAdaptSgd),
    Adam(DAdaptAdam),
    AdagradNorm {
        x: Vector,
        center: Vector,
        big_d: f64,
        lr: f64,
        acc: AdaGradNormAcc,
    },
    Polyak {
        x: Vector,
        fstar: f64,
    },
    Fixed {
        x: Vector,
        step: f64,
    },
    Adagrad(AdaGrad),
}

/// Problem constants the optimizers may need, with overrides applied.
struct Constants {
    big_g: Option<f64>,
    big_g_inf: Option<f64>,
    big_d: Option<f64>,
    fstar: Option<f64>,
}

impl Constants {
    fn resolve(config: &ExperimentConfig, problem: &dyn Problem, x0: &[f64]) -> Self {
        Self {
            big_g: config.lipschitz.or(problem.lipschitz()),
            big_g_inf: config.lipschitz_inf.or(problem.lipschitz_inf()),
            big_d: config
                .distance
                .or_else(|| problem.known_minimizer().map(|m| distance(x0, m))),
            fstar: problem.known_fstar(),
        }
    }
}

impl Optimizer {
    /// Built lazily from the first gradient, which supplies `G` estimates.
    /// Returns the optimizer and whether an estimate was used.
    fn build(
        config: &ExperimentConfig,
        consts: &Constants,
        x0: Vector,
        g0: &[f64],
        total: usize,
    ) -> Result<(Self, bool)> {
        let need = |what: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::config(format!("{} needs {what}; set it in the config", config.algorithm)))
        };
        let estimate = |known: Option<f64>, fallback: f64| -> Result<(f64, bool)> {
            match known {
                Some(v) => Ok((v, false)),
                None if fallback > 0.0 => Ok((fallback, true)),
                None => Err(Error::precondition("cannot estimate G from a zero first gradient")),
            }
        };
        Ok(match config.algorithm {
            Algorithm::DaI | Algorithm::DaII => {
                let option = if config.algorithm == Algorithm::DaI { DOption::I } else { DOption::II };
                let (g_mode, heuristic) = match config.g_mode {
                    GModeSpec::None => (GMode::None, false),
                    GModeSpec::Fixed => {
                        let (g, h) = estimate(consts.big_g, norm2(g0))?;
                        (GMode::Fixed(g), h)
                    }
                };
                (Optimizer::Da(DualAveraging::new(x0, config.d0, option, g_mode)?), heuristic)
            }
            Algorithm::Gd => {
                let (g, h) = estimate(consts.big_g, norm2(g0))?;
                (Optimizer::Gd(DAdaptGd::new(x0, config.d0, g)?), h)
            }
            Algorithm::AdagradDa => {
                let (g, h) = estimate(consts.big_g_inf, norm_inf(g0))?;
                (Optimizer::AdagradDa(DAdaptAdaGrad::new(x0, config.d0, g)?), h)
            }
            Algorithm::SgdDa => (
                Optimizer::Sgd(DAdaptSgd::new(x0, config.d0, config.beta, consts.big_g)?),
                consts.big_g.is_none(),
            ),
            Algorithm::AdamDa => (
                Optimizer::Adam(DAdaptAdam::new(
                    x0,
                    AdamConfig {
                        d0: config.d0,
                        beta1: config.beta1,
                        beta2: config.beta2,
                        eps: config.eps,
                        decay: config.decay,
                    },
                )?),
                false,
            ),
            Algorithm::AdagradNorm => (
                Optimizer::AdagradNorm {
                    center: x0.clone(),
                    x: x0,
                    big_d: need("a distance D", consts.big_d)?,
                    lr: config.lr,
                    acc: AdaGradNormAcc::default(),
                },
                false,
            ),
            Algorithm::Polyak => (
                Optimizer::Polyak {
                    x: x0,
                    fstar: need("a known optimal value", consts.fstar)?,
                },
                false,
            ),
            Algorithm::Fixed => {
                let big_d = need("a distance D", consts.big_d)?;
                let big_g = need("a Lipschitz constant G", consts.big_g)?;
                let step = config.lr * big_d / (big_g * (total as f64).sqrt());
                (Optimizer::Fixed { x: x0, step }, false)
            }
            Algorithm::Adagrad => (
                Optimizer::Adagrad(AdaGrad::new(x0, config.lr, AdaGrad::DEFAULT_EPS)?),
                false,
            ),
        })
    }

    fn x(&self) -> &[f64] {
        match self {
            Optimizer::Da(o) => o.x(),
            Optimizer::Gd(o) => o.x(),
            Optimizer::AdagradDa(o) => o.x(),
            Optimizer::Sgd(o) => o.x(),
            Optimizer::Adam(o) => o.x(),
            Optimizer::AdagradNorm { x, .. } | Optimizer::Polyak { x, .. } | Optimizer::Fixed { x, .. } => x,
            Optimizer::Adagrad(o) => o.x(),
        }
    }

    fn step(&mut self, g: &[f64], gamma: f64, problem: &dyn Problem) -> Result<Outcome> {
        Ok(match self {
            Optimizer::Da(o) => Outcome::from_record(&o.step(g)?, true),
            Optimizer::Gd(o) => Outcome::from_record(&o.step(g)?, true),
            Optimizer::AdagradDa(o) => Outcome::from_record(&o.step(g, gamma)?, true),
            Optimizer::Sgd(o) => match o.step(g, gamma)? {
                Some(r) => Outcome::from_record(&r, false),
                None => Outcome {
                    d: Some(o.d()),
                    d_next: Some(o.d()),
                    dhat: None,
                    scale: 0.0,
                    avg_weight: 0.0,
                },
            },
            Optimizer::Adam(o) => Outcome::from_record(&o.step(g, gamma)?, false),
            Optimizer::AdagradNorm {
                x,
                center,
                big_d,
                lr,
                acc,
            } => {
                *x = adagrad_norm_step(x, g, center, *big_d, *lr * gamma, acc);
                let scale = if acc.sum_gsq > 0.0 {
                    *lr * gamma * *big_d / acc.sum_gsq.sqrt()
                } else {
                    0.0
                };
                Outcome::plain(scale, 0.0)
            }
            Optimizer::Polyak { x, fstar } => {
                let fx = problem.value(x);
                let gsq = crate::vector::norm2_sq(g);
                let scale = if gsq > 0.0 { (fx - *fstar) / gsq } else { 0.0 };
                *x = polyak_step(x, g, fx, *fstar)?;
                Outcome::plain(scale, 0.0)
            }
            Optimizer::Fixed { x, step } => {
                let s = *step * gamma;
                axpy(-s, g, x);
                Outcome::plain(s, 1.0)
            }
            Optimizer::Adagrad(o) => {
                o.step(g, gamma);
                Outcome::plain(gamma, 0.0)
            }
        })
    }
}

fn diverged(x: &[f64]) -> bool {
    let n = norm2(x);
    !n.is_finite() || n > DIVERGENCE_NORM
}

/// Runs one seed of a config on a prebuilt instance.
pub fn run_seed(config: &ExperimentConfig, instance: &Instance, seed: u64) -> Result<SeedRun> {
    config.validate()?;
    let problem = instance.problem();
    let dim = instance.dim();
    let x0 = vec![config.x0; dim];
    let consts = Constants::resolve(config, problem, &x0);
    let total = instance.total_steps(config);
    let record_every = config.record_every.unwrap_or(instance.steps_per_epoch());
    let run_id = config.run_id(seed);

    let mut rng = seeded_rng(config.sampling_key(), 2 * seed);
    let mut oracle = match &instance.kind {
        InstanceKind::Convex(p) => Oracle::Convex(p.as_ref()),
        InstanceKind::Dataset(p) => Oracle::Dataset(p, p.sampler(seeded_rng(config.sampling_key(), 2 * seed + 1))),
    };

    let mut optimizer: Option<Optimizer> = None;
    let mut heuristic = false;
    let mut rows = Vec::new();
    let mut work = 0u64;
    let mut avg_num = vec![0.0; dim];
    let mut avg_den = 0.0;
    let mut d_seq: Vec<f64> = Vec::new();
    let mut iterates: Vec<Vector> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut steps_done = 0;
    let mut is_diverged = false;
    let keep_iterates = config.algorithm.is_convex_dadapt();

    for k in 0..total {
        let gamma = config.schedule.eval(k, total)?;
        let x = optimizer.as_ref().map_or_else(|| x0.clone(), |o| o.x().to_vec());
        let (g, cost) = oracle.gradient(&x, &mut rng)?;
        work += cost;
        if optimizer.is_none() {
            if config.algorithm.is_convex_dadapt() && g.iter().all(|v| *v == 0.0) {
                // x0 is already a minimizer.
                break;
            }
            let (opt, h) = Optimizer::build(config, &consts, x0.clone(), &g, total)?;
            heuristic = h;
            optimizer = Some(opt);
        }
        let opt = optimizer.as_mut().expect("built above");
        let outcome = opt.step(&g, gamma, problem)?;
        steps_done = k + 1;

        if d_seq.is_empty() {
            if let Some(d) = outcome.d {
                d_seq.push(d);
            }
        }
        if let Some(d) = outcome.d_next {
            d_seq.push(d);
        }
        if outcome.avg_weight > 0.0 {
            axpy(outcome.avg_weight, &x, &mut avg_num);
            avg_den += outcome.avg_weight;
        }
        if keep_iterates {
            weights.push(outcome.avg_weight);
            iterates.push(x.clone());
        }

        let last = k + 1 == total;
        if k % record_every == 0 || last {
            let f = problem.value(&x);
            rows.push(CsvRow {
                step: k,
                d: outcome.d,
                dhat: outcome.dhat,
                gamma_or_lambda: Some(outcome.scale),
                f,
                gnorm2: Some(g.iter().map(|v| v * v).sum()),
                elapsed: work,
            });
            if !f.is_finite() {
                is_diverged = true;
                break;
            }
        }
        if diverged(opt.x()) {
            is_diverged = true;
            break;
        }
    }

    let x_last = optimizer.as_ref().map_or_else(|| x0.clone(), |o| o.x().to_vec());
    let final_f = problem.value(&x_last);
    let is_diverged = is_diverged || !final_f.is_finite();
    let f_average = (avg_den > 0.0 && !is_diverged).then(|| {
        let avg: Vector = avg_num.iter().map(|v| v / avg_den).collect();
        problem.value(&avg)
    });
    let (selected_t, f_selected) = if keep_iterates && d_seq.len() >= 2 && !is_diverged {
        let t = select_return_index(&d_seq)?;
        let mut num = vec![0.0; dim];
        let mut den = 0.0;
        for (x, w) in iterates.iter().zip(&weights).take(t + 1) {
            axpy(*w, x, &mut num);
            den += w;
        }
        let xt: Vector = num.iter().map(|v| v / den).collect();
        (Some(t), Some(problem.value(&xt)))
    } else {
        (None, None)
    };
    let final_d = d_seq.last().copied();
    rows.push(CsvRow {
        step: steps_done,
        d: final_d,
        dhat: None,
        gamma_or_lambda: None,
        f: final_f,
        gnorm2: None,
        elapsed: work,
    });
    let out_of_theory = config.algorithm.is_dadapt() && consts.big_d.is_some_and(|d| config.d0 > d);

    Ok(SeedRun {
        rows,
        x_last,
        summary: SeedSummary {
            run_id,
            seed,
            algorithm: config.algorithm.to_string(),
            steps: steps_done,
            final_f,
            final_d,
            f_average,
            selected_t,
            f_selected,
            diverged: is_diverged,
            heuristic,
            out_of_theory,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> ExperimentConfig {
        ExperimentConfig::parse("problem = abs\nx0 = 1\nd0 = 0.1\nsteps = 300\nalgorithm = da_I").unwrap()
    }

    #[test]
    fn toy_d_trajectory() {
        let c = toy();
        let inst = Instance::build(&c).unwrap();
        let run = run_seed(&c, &inst, 0).unwrap();
        assert_eq!(run.rows.len(), 301);
        assert_eq!(run.rows[300].f, run.summary.final_f);
        assert_eq!(run.rows[0].d, Some(0.1));
        let ds: Vec<f64> = run.rows.iter().map(|r| r.d.unwrap()).collect();
        assert!(ds.windows(2).all(|w| w[1] >= w[0]));
        assert!(run.summary.final_d.unwrap() <= 1.0);
        assert!(run.summary.selected_t.is_some());
        assert!(!run.summary.diverged);
    }

    #[test]
    fn every_algorithm_runs_on_abs() {
        for alg in Algorithm::ALL {
            let c = toy().with_overrides(&[format!("algorithm={alg}")]).unwrap();
            let inst = Instance::build(&c).unwrap();
            let run = run_seed(&c, &inst, 1).unwrap();
            assert!(run.summary.final_f.is_finite(), "{alg}");
            // Adam keeps a step of order d on a kink and need not settle
            if alg != Algorithm::AdamDa {
                assert!(run.summary.final_f < 1.0, "{alg}: {}", run.summary.final_f);
            }
        }
    }

    #[test]
    fn minimizer_start_exits() {
        let c = toy().with_overrides(&["x0=0"]).unwrap();
        let inst = Instance::build(&c).unwrap();
        let run = run_seed(&c, &inst, 0).unwrap();
        assert_eq!(run.summary.steps, 0);
        assert_eq!(run.summary.final_f, 0.0);
    }

    #[test]
    fn d0_above_distance_is_flagged() {
        let c = toy().with_overrides(&["d0=10"]).unwrap();
        let inst = Instance::build(&c).unwrap();
        let run = run_seed(&c, &inst, 0).unwrap();
        assert!(run.summary.out_of_theory);
        assert_eq!(run.summary.final_d, Some(10.0));
    }

    #[test]
    fn missing_constants_are_config_errors() {
        let c = ExperimentConfig::parse("problem = synth\nsamples = 20\ndim = 3\nalgorithm = polyak\nsteps = 3").unwrap();
        let inst = Instance::build(&c).unwrap();
        assert!(matches!(run_seed(&c, &inst, 0), Err(Error::Config(_))));
    }

    #[test]
    fn seeds_differ_on_stochastic_problem() {
        let c = ExperimentConfig::parse(
            "problem = synth\nsamples = 40\ndim = 3\nalgorithm = sgd_da\nepochs = 2\nbatch_size = 4",
        )
        .unwrap();
        let inst = Instance::build(&c).unwrap();
        let a = run_seed(&c, &inst, 0).unwrap();
        let b = run_seed(&c, &inst, 1).unwrap();
        let a2 = run_seed(&c, &inst, 0).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        assert_ne!(a.x_last, b.x_last);
        assert_eq!(a.x_last, a2.x_last);
        // start of each epoch plus the final step
        assert_eq!(a.rows.len(), 4);
        assert!(a.summary.heuristic);
    }

    #[test]
    fn divergence_is_flagged() {
        let c = toy().with_overrides(&["algorithm=fixed", "lr=1e300", "x0=1"]).unwrap();
        let inst = Instance::build(&c).unwrap();
        let run = run_seed(&c, &inst, 0).unwrap();
        assert!(run.summary.diverged);
        assert!(run.summary.steps < 300);
    }
}
