use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

use crate::analysis::{
    check_adagrad_sum, check_d_envelope, check_d_lower_bound, check_dasym, check_log_sum,
    check_mindk, check_option_dominance_run, check_rate_theorem1, check_rate_theorem2,
    check_snorm_bound, check_streeter_mcmahan, check_telescoping, BoundReport,
};
use crate::dadapt::{run_convex, ConvexConfig, ConvexMethod, DOption, GMode};
use crate::error::{Error, Result};
use crate::ml::EmaPair;
use crate::problem::Problem;
use crate::problems::{AbsValueProblem, PiecewiseMaxProblem};
use crate::rng::seeded_rng;
use crate::vector::{distance, distance_inf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lemmas,
    Bounds,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemmas" => Ok(Suite::Lemmas),
            "bounds" => Ok(Suite::Bounds),
            "all" => Ok(Suite::All),
            _ => Err(Error::config(format!("unknown suite '{s}' (lemmas, bounds, all)"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Lemmas => "lemmas",
            Suite::Bounds => "bounds",
            Suite::All => "all",
        })
    }
}

pub fn run_suite(suite: Suite) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Lemmas | Suite::All) {
        out.extend(lemma_suite()?);
    }
    if matches!(suite, Suite::Bounds | Suite::All) {
        out.extend(bound_suite()?);
    }
    Ok(out)
}

fn lemma_suite() -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    let mut rng = seeded_rng(0x1e44a, 0);
    for i in 0..200 {
        let big_g = 10f64.powf(rng.random_range(-2.0..2.0));
        let len = rng.random_range(0..=64);
        let norms: Vec<f64> = (0..len).map(|_| big_g * rng.random::<f64>()).collect();
        let ctx = format!("instance={i}");
        out.push(check_streeter_mcmahan(&norms, big_g)?.with_context(&ctx));
        out.push(check_adagrad_sum(&norms, big_g)?.with_context(&ctx));
        out.push(check_log_sum(&norms, big_g)?.with_context(&ctx));
    }
    for i in 0..200 {
        let len = rng.random_range(2..=150);
        let mut d = vec![10f64.powf(rng.random_range(-6.0..0.0))];
        for _ in 1..len {
            let last = *d.last().expect("non-empty");
            d.push(last * rng.random_range(1.0..1.3));
        }
        out.push(check_mindk(&d)?.with_context(format!("instance={i}")));
    }
    for c in [0.5, 0.9, 0.999] {
        let mut pair = EmaPair::new(c)?;
        let mut worst: (f64, f64, f64) = (0.0, 0.0, 0.0);
        for _ in 0..100 {
            pair.step(rng.random_range(-1.0..1.0));
            let p = pair.predicted_u_hat();
            let scale = pair.u_hat.abs().max(p.abs());
            if (pair.u_hat - p).abs() >= (worst.0 - worst.1).abs() {
                worst = (pair.u_hat, p, scale);
            }
        }
        out.push(
            BoundReport::identity("ema_equivalence", worst.0, worst.1, worst.2, 1e-10)
                .with_context(format!("c={c}")),
        );
    }
    Ok(out)
}

fn bound_suite() -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    for seed in 0..20u64 {
        let mut rng = seeded_rng(seed, 0xb0);
        let dim = rng.random_range(1..=8);
        let active = rng.random_range(2..=dim + 1);
        let problem = PiecewiseMaxProblem::random(dim, active, 3, 1.0, &mut rng)?;
        let x0 = vec![0.0; dim];
        let x_star = problem.known_minimizer().expect("planted minimizer");
        let big_g = problem.lipschitz().expect("finite pieces");
        let methods = [
            ConvexMethod::DualAveraging { option: DOption::I, g_mode: GMode::None },
            ConvexMethod::DualAveraging { option: DOption::II, g_mode: GMode::None },
            ConvexMethod::GradientDescent { lipschitz: big_g },
            ConvexMethod::AdaGrad { lipschitz_inf: problem.lipschitz_inf().expect("finite pieces") },
        ];
        for method in methods {
            let mut cfg = ConvexConfig::new(method, 1e-6, 1000);
            cfg.record_every = 0;
            let run = run_convex(&problem, &x0, &cfg)?;
            let big_d = match method {
                ConvexMethod::AdaGrad { .. } => distance_inf(&x0, x_star),
                _ => distance(&x0, x_star),
            };
            let ctx = format!("seed={seed} {:?}", method.kind());
            let t = &run.trajectory;
            out.push(check_d_lower_bound(t, big_d)?.with_context(&ctx));
            out.push(check_d_envelope(t, big_d)?.with_context(&ctx));
            out.push(check_telescoping(t)?.with_context(&ctx));
            out.push(check_snorm_bound(t)?.with_context(&ctx));
            out.push(check_option_dominance_run(t)?.with_context(&ctx));
        }
    }
    let abs = AbsValueProblem::new();
    let abs_run = |g_mode, steps| {
        let mut cfg = ConvexConfig::new(ConvexMethod::DualAveraging { option: DOption::I, g_mode }, 0.1, steps);
        cfg.record_every = 0;
        run_convex(&abs, &[1.0], &cfg)
    };
    out.extend(check_rate_theorem2(&abs_run(GMode::Fixed(1.0), 10_001)?, &abs, 1.0, 1.0)?);
    out.push(check_rate_theorem1(&abs_run(GMode::None, 10_001)?, &abs, 1.0, 1.0)?);
    let long = abs_run(GMode::None, 100_001)?;
    out.push(check_dasym(&long.trajectory, &long.x_last, &[0.0], 1.0)?);
    Ok(out)
}
