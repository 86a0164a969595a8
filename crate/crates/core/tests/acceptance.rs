//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng as _;

use dadapt::analysis::{
    check_d_envelope, check_d_lower_bound, check_dasym, check_mindk, check_option_dominance_run,
    check_rate_theorem1, check_rate_theorem2, check_snorm_bound, check_streeter_mcmahan,
    check_adagrad_sum, check_log_sum, check_telescoping, BoundReport,
};
use dadapt::dadapt::{run_convex, ConvexConfig, ConvexMethod, ConvexRun, DOption, GMode};
use dadapt::dadapt::{DAdaptAdaGrad, DAdaptGd, DualAveraging};
use dadapt::ml::{AdamConfig, DAdaptAdam, DAdaptSgd, EmaPair};
use dadapt::problems::{AbsValueProblem, PiecewiseMaxProblem};
use dadapt::rng::seeded_rng;
use dadapt::vector::{distance, distance_inf};
use dadapt::harness::{d0_sweep, grid_search, Algorithm, ExperimentConfig};
use dadapt::Problem;

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Option<Duration>,
    run: fn() -> Verdict,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, title: "D lower bound soundness", budget: Some(Duration::from_secs(30)), run: criterion_1 },
    Criterion { id: 2, title: "identity and s-norm suite", budget: None, run: criterion_2 },
    Criterion { id: 3, title: "non-asymptotic rate on |x|", budget: Some(Duration::from_secs(1)), run: criterion_3 },
    Criterion { id: 4, title: "asymptotic d level", budget: Some(Duration::from_secs(5)), run: criterion_4 },
    Criterion { id: 5, title: "Option II dominance", budget: None, run: criterion_5 },
    Criterion { id: 6, title: "d0 insensitivity", budget: Some(Duration::from_secs(60)), run: criterion_6 },
    Criterion { id: 7, title: "grid match", budget: None, run: criterion_7 },
    Criterion { id: 8, title: "EMA equivalence", budget: None, run: criterion_8 },
    Criterion { id: 9, title: "randomized lemma sweeps", budget: None, run: criterion_9 },
    Criterion { id: 10, title: "hand-trace oracles", budget: None, run: criterion_10 },
    Criterion { id: 11, title: "run determinism", budget: None, run: criterion_11 },
];

fn main() -> ExitCode {
    let mut failed = 0;
    for c in CRITERIA {
        let start = Instant::now();
        let verdict = (c.run)();
        let elapsed = start.elapsed();
        let in_budget = c.budget.is_none_or(|b| elapsed <= b);
        let passed = verdict.passed && in_budget;
        if !passed {
            failed += 1;
        }
        let budget = match c.budget {
            Some(b) if !in_budget => format!(" over budget {:.0?}", b),
            _ => String::new(),
        };
        println!(
            "criterion {:>2} {} {}: {} ({:.2?}{budget})",
            c.id,
            if passed { "PASS" } else { "FAIL" },
            c.title,
            verdict.detail,
            elapsed
        );
    }
    println!("acceptance: {} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

// ---------------------------------------------------------------- convex sweep

struct SweepRun {
    label: String,
    big_d: f64,
    big_d_inf: f64,
    run: ConvexRun,
}

fn piecewise_instance(seed: u64) -> PiecewiseMaxProblem {
    let mut rng = seeded_rng(seed, 1);
    let dim = rng.random_range(1..=12);
    let active = rng.random_range(2..=dim + 1);
    let inactive = rng.random_range(0..=8);
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    PiecewiseMaxProblem::random(dim, active, inactive, scale, &mut rng).expect("valid instance")
}

fn convex_sweep() -> &'static [SweepRun] {
    use std::sync::OnceLock;
    static RUNS: OnceLock<Vec<SweepRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let mut runs = Vec::new();
        for seed in 0..100u64 {
            let problem = piecewise_instance(seed);
            let x0 = vec![0.0; problem.dim()];
            let x_star = problem.known_minimizer().unwrap();
            let big_d = distance(&x0, x_star);
            let big_d_inf = distance_inf(&x0, x_star);
            let g = problem.lipschitz().unwrap();
            let g_inf = problem.lipschitz_inf().unwrap();
            let methods = [
                ("alg1-I", ConvexMethod::DualAveraging { option: DOption::I, g_mode: GMode::None }),
                ("alg1-II", ConvexMethod::DualAveraging { option: DOption::II, g_mode: GMode::None }),
                ("alg1-I-G", ConvexMethod::DualAveraging { option: DOption::I, g_mode: GMode::Fixed(g) }),
                ("alg2", ConvexMethod::GradientDescent { lipschitz: g }),
                ("alg3", ConvexMethod::AdaGrad { lipschitz_inf: g_inf }),
            ];
            for (name, method) in methods {
                let mut cfg = ConvexConfig::new(method, 1e-6, 1000);
                cfg.seed = seed;
                cfg.record_every = 0;
                let run = run_convex(&problem, &x0, &cfg).expect("run succeeds");
                runs.push(SweepRun {
                    label: format!("seed={seed} {name}"),
                    big_d,
                    big_d_inf,
                    run,
                });
            }
        }
        runs
    })
}

fn tally(reports: impl IntoIterator<Item = (String, BoundReport)>) -> (usize, usize, Option<String>) {
    let mut total = 0;
    let mut bad = 0;
    let mut first = None;
    for (label, r) in reports {
        total += 1;
        if !r.satisfied() {
            bad += 1;
            first.get_or_insert_with(|| format!("{label}: {r}"));
        }
    }
    (total, bad, first)
}

fn criterion_1() -> Verdict {
    let runs = convex_sweep();
    let mut reports = Vec::new();
    let mut errors = 0;
    for s in runs {
        let big_d = match s.run.method {
            ConvexMethod::AdaGrad { .. } => s.big_d_inf,
            _ => s.big_d,
        };
        match (
            check_d_lower_bound(&s.run.trajectory, big_d),
            check_d_envelope(&s.run.trajectory, big_d),
        ) {
            (Ok(a), Ok(b)) => {
                reports.push((s.label.clone(), a));
                reports.push((s.label.clone(), b));
            }
            _ => errors += 1,
        }
    }
    let (total, bad, first) = tally(reports);
    Verdict::new(
        bad == 0 && errors == 0,
        format!(
            "{} runs x 1000 steps, {bad} violations of {total} checks, {errors} errors{}",
            runs.len(),
            first.map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn criterion_2() -> Verdict {
    let runs = convex_sweep();
    let mut reports = Vec::new();
    let mut errors = 0;
    let mut worst_identity: f64 = 0.0;
    for s in runs {
        match (check_telescoping(&s.run.trajectory), check_snorm_bound(&s.run.trajectory)) {
            (Ok(t), Ok(n)) => {
                if !matches!(s.run.method, ConvexMethod::AdaGrad { .. }) {
                    let scale = t.lhs.abs().max(t.rhs.abs());
                    worst_identity = worst_identity.max((t.lhs - t.rhs).abs() / scale);
                }
                reports.push((s.label.clone(), t));
                reports.push((s.label.clone(), n));
            }
            _ => errors += 1,
        }
    }
    let (total, bad, first) = tally(reports);
    Verdict::new(
        bad == 0 && errors == 0 && worst_identity < 1e-8,
        format!(
            "{bad} violations of {total} checks, worst identity residual {worst_identity:.2e}{}",
            first.map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn abs_run(g_mode: GMode, steps: usize) -> ConvexRun {
    let method = ConvexMethod::DualAveraging { option: DOption::I, g_mode };
    let mut cfg = ConvexConfig::new(method, 0.1, steps);
    cfg.record_every = 0;
    run_convex(&AbsValueProblem::new(), &[1.0], &cfg).expect("run succeeds")
}

fn criterion_3() -> Verdict {
    let problem = AbsValueProblem::new();
    let fixed = abs_run(GMode::Fixed(1.0), 10_001);
    let plain = abs_run(GMode::None, 10_001);
    let mut reports = match check_rate_theorem2(&fixed, &problem, 1.0, 1.0) {
        Ok(r) => r,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    match check_rate_theorem1(&plain, &problem, 1.0, 1.0) {
        Ok(r) => reports.push(r),
        Err(e) => return Verdict::new(false, e.to_string()),
    }
    let ok = reports.iter().all(|r| r.satisfied() && r.slack > 0.0);
    let detail = reports
        .iter()
        .map(|r| format!("{} {:.3e} <= {:.3e}", r.name, r.lhs, r.rhs))
        .collect::<Vec<_>>()
        .join(", ");
    Verdict::new(ok, detail)
}

fn criterion_4() -> Verdict {
    let run = abs_run(GMode::None, 100_001);
    match check_dasym(&run.trajectory, &run.x_last, &[0.0], 1.0) {
        Ok(r) => Verdict::new(
            r.satisfied(),
            format!("final d {:.6} >= {:.6}, |x_n| = {:.2e}", r.rhs, r.lhs, run.x_last[0].abs()),
        ),
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

fn criterion_5() -> Verdict {
    let runs = convex_sweep();
    let mut reports = Vec::new();
    let mut errors = 0;
    for s in runs {
        match check_option_dominance_run(&s.run.trajectory) {
            Ok(r) => reports.push((s.label.clone(), r)),
            Err(_) => errors += 1,
        }
    }
    let (total, bad, first) = tally(reports);
    Verdict::new(
        bad == 0 && errors == 0,
        format!(
            "{bad} violations over {total} runs{}",
            first.map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------- lemma sweeps

fn criterion_8() -> Verdict {
    let mut worst: f64 = 0.0;
    for (ci, c) in [0.5, 0.9, 0.999].into_iter().enumerate() {
        for seq in 0..100u64 {
            let mut rng = seeded_rng(seq, 800 + ci as u64);
            let mut pair = EmaPair::new(c).unwrap();
            for _ in 0..100 {
                pair.step(rng.random_range(-1.0..1.0));
                let predicted = pair.predicted_u_hat();
                let scale = pair.u_hat.abs().max(predicted.abs());
                if scale > 0.0 {
                    worst = worst.max((pair.u_hat - predicted).abs() / scale);
                }
            }
        }
    }
    Verdict::new(worst <= 1e-10, format!("300 sequences x 100 steps, worst relative error {worst:.2e}"))
}

fn criterion_9() -> Verdict {
    let mut rng = seeded_rng(9, 0);
    let mut prop_bad = 0;
    let mut prop_err = 0;
    for _ in 0..1000 {
        let big_g = 10f64.powf(rng.random_range(-3.0..3.0));
        let len = rng.random_range(0..=64);
        let sparse = rng.random_bool(0.3);
        let norms: Vec<f64> = (0..len)
            .map(|_| {
                if sparse && rng.random_bool(0.5) {
                    0.0
                } else {
                    big_g * rng.random::<f64>()
                }
            })
            .collect();
        for check in [check_streeter_mcmahan, check_adagrad_sum, check_log_sum] {
            match check(&norms, big_g) {
                Ok(r) if r.satisfied() => {}
                Ok(_) => prop_bad += 1,
                Err(_) => prop_err += 1,
            }
        }
    }
    let mut mindk_bad = 0;
    let mut mindk_err = 0;
    let mut skipped = 0;
    for _ in 0..1000 {
        let len = rng.random_range(2..=200);
        let mut d = vec![10f64.powf(rng.random_range(-8.0..0.0))];
        let style = rng.random_range(0..3);
        for k in 1..len {
            let last = d[k - 1];
            let next = match style {
                0 => last * rng.random_range(1.0..1.5),
                1 => if rng.random_bool(0.1) { last * rng.random_range(1.0..20.0) } else { last },
                _ => last * 2f64.powf(rng.random_range(0.0..0.6)),
            };
            d.push(next);
        }
        match check_mindk(&d) {
            Ok(r) if r.skipped_reason().is_some() => skipped += 1,
            Ok(r) if r.satisfied() => {}
            Ok(_) => mindk_bad += 1,
            Err(_) => mindk_err += 1,
        }
    }
    Verdict::new(
        prop_bad + prop_err + mindk_bad + mindk_err == 0,
        format!(
            "gradient sums: {prop_bad} violations, {prop_err} errors over 3000 checks; \
             min ratio: {mindk_bad} violations, {mindk_err} errors, {skipped} gated of 1000"
        ),
    )
}

fn criterion_10() -> Verdict {
    let mut failures: Vec<String> = Vec::new();
    let mut check = |name: &str, got: f64, want: f64| {
        if (got - want).abs() > 1e-9 {
            failures.push(format!("{name}: got {got}, want {want}"));
        }
    };

    for option in [DOption::I, DOption::II] {
        let mut da = DualAveraging::new(vec![1.0], 0.1, option, GMode::None).unwrap();
        let r0 = da.step(&[1.0]).unwrap();
        check("alg1 s1", da.s()[0], 0.1);
        check("alg1 gamma1", r0.gamma_next, 1.0);
        check("alg1 dhat1", r0.dhat, 0.0);
        check("alg1 d1", da.d(), 0.1);
        check("alg1 x1", da.x()[0], 0.9);
        let r1 = da.step(&[1.0]).unwrap();
        check("alg1 s2", da.s()[0], 0.2);
        check("alg1 gamma2", r1.gamma_next, 1.0 / 2f64.sqrt());
        let want = match option {
            DOption::I => (0.04 / 2f64.sqrt() - 0.02) / 0.4,
            DOption::II => 0.05,
        };
        check("alg1 dhat2", r1.dhat, want);
        check("alg1 d2", da.d(), 0.1);
        check("alg1 x2", da.x()[0], 1.0 - 0.2 / 2f64.sqrt());
    }
    check("alg1 dhat2 opt I literal", (0.04 / 2f64.sqrt() - 0.02) / 0.4, 0.020_710_678_1);
    check("alg1 x2 literal", 1.0 - 0.2 / 2f64.sqrt(), 0.858_578_643_8);

    let mut gd = DAdaptGd::new(vec![1.0], 0.1, 1.0).unwrap();
    let r = gd.step(&[1.0]).unwrap();
    check("alg2 lambda0", r.weight, 0.070_710_678_1);
    check("alg2 s1", gd.s()[0], 0.070_710_678_1);
    check("alg2 dhat1", r.dhat, 0.0);
    check("alg2 x1", gd.x()[0], 0.929_289_321_9);

    let mut ada = DAdaptAdaGrad::new(vec![1.0], 0.1, 1.0).unwrap();
    let r = ada.step(&[1.0], 1.0).unwrap();
    check("alg3 s1", ada.s()[0], 0.1);
    check("alg3 a1", ada.a()[0], 2f64.sqrt());
    check("alg3 dhat1", r.dhat, -0.014_644_660_9);
    check("alg3 d1", ada.d(), 0.1);
    check("alg3 x1", ada.x()[0], 0.929_289_321_9);

    let mut sgd = DAdaptSgd::new(vec![1.0], 0.1, 0.9, Some(1.0)).unwrap();
    let r0 = sgd.step(&[1.0], 1.0).unwrap().unwrap();
    check("alg4 lambda0", r0.weight, 0.1);
    check("alg4 s1", sgd.s()[0], 0.1);
    check("alg4 z1", sgd.z()[0], 0.9);
    check("alg4 x1", sgd.x()[0], 0.99);
    check("alg4 dhat1", r0.dhat, 0.0);
    check("alg4 d1", sgd.d(), 0.1);
    let r1 = sgd.step(&[1.0], 1.0).unwrap().unwrap();
    check("alg4 lambda1", r1.weight, 0.1);
    check("alg4 hypergrad", r1.numer_opt2, 0.01);
    check("alg4 s2", sgd.s()[0], 0.2);
    check("alg4 z2", sgd.z()[0], 0.8);
    check("alg4 x2", sgd.x()[0], 0.971);
    check("alg4 dhat2", r1.dhat, 0.1);
    check("alg4 d2", sgd.d(), 0.1);

    let mut adam = DAdaptAdam::new(vec![1.0], AdamConfig { d0: 0.1, ..AdamConfig::default() }).unwrap();
    let r = adam.step(&[1.0], 1.0).unwrap();
    check("alg5 m1", adam.m()[0], 0.01);
    check("alg5 v1", adam.v()[0], 0.001);
    check("alg5 x1", adam.x()[0], 1.0 - 0.01 / (0.001f64.sqrt() + 1e-8));
    check("alg5 s1", adam.s()[0], (1.0 - 0.999f64.sqrt()) * 0.1);
    check("alg5 s1 literal", adam.s()[0], 5.0013e-5);
    check("alg5 r1", adam.r(), 0.0);
    check("alg5 dhat1", r.dhat, 0.0);
    check("alg5 d1", adam.d(), 0.1);

    let n = failures.len();
    Verdict::new(
        n == 0,
        if n == 0 {
            "all traced values within 1e-9".to_string()
        } else {
            failures.join("; ")
        },
    )
}

// ---------------------------------------------------------------- logistic studies

const LOGISTIC: &str = "\
problem = synth
samples = 1000
dim = 20
batch_size = 16
epochs = 100
schedule = stagewise
algorithm = adagrad_da
seeds = 0
";

fn criterion_6() -> Verdict {
    let d0s = [1e-16, 1e-12, 1e-8, 1e-6, 1e-4, 1e-2];
    let adam = ExperimentConfig::parse(LOGISTIC)
        .and_then(|c| c.with_overrides(&["algorithm=adam_da"]))
        .expect("valid config");
    let s = match d0_sweep(&adam, &d0s) {
        Ok(s) => s,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let losses = s
        .points
        .iter()
        .map(|p| format!("{:e}:{:.6}", p.d0, p.final_f))
        .collect::<Vec<_>>()
        .join(" ");
    // reported for reference; the coordinate-wise dual averaging method
    // spends several epochs growing d from the smallest d0
    let adagrad = ExperimentConfig::parse(LOGISTIC).expect("valid config");
    let adagrad_spread = d0_sweep(&adagrad, &d0s).map_or(f64::NAN, |r| r.spread);
    Verdict::new(
        s.spread < 0.01 && s.points.iter().all(|p| !p.diverged),
        format!(
            "adam_da relative spread {:.3e} < 1e-2; final losses {losses}; adagrad_da spread {adagrad_spread:.3e} (not gated)",
            s.spread
        ),
    )
}

fn criterion_7() -> Verdict {
    let template = ExperimentConfig::parse(LOGISTIC)
        .and_then(|c| c.with_overrides(&["algorithm=adagrad"]))
        .expect("valid config");
    let lrs = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2];
    match grid_search(&template, &lrs, Some(Algorithm::AdagradDa)) {
        Ok(r) => {
            let (Some(best), Some(da)) = (r.best(), r.reference.as_ref()) else {
                return Verdict::new(false, "no usable grid point");
            };
            let gap = (da.final_f - best.final_f) / best.final_f;
            Verdict::new(
                gap <= 0.05,
                format!(
                    "adagrad_da {:.6} vs best grid lr {:e} at {:.6}: relative gap {:+.3e} <= 5e-2",
                    da.final_f,
                    best.lr.unwrap_or(f64::NAN),
                    best.final_f,
                    gap
                ),
            )
        }
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

// ---------------------------------------------------------------- determinism

fn invoke_run(config: &Path, out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_dadapt"))
        .arg("run")
        .arg(config)
        .arg("--output")
        .arg(out)
        .stdout(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("dadapt run exited with {status}"))
    }
}

fn criterion_11() -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let configs = [
        ("toy", "problem = abs\nx0 = 1\nd0 = 0.1\nalgorithm = da_I\nsteps = 2000\nseeds = 0,1\n".to_string()),
        ("piecewise", "problem = piecewise\ndim = 6\nalgorithm = adagrad_da\nsteps = 2000\nseeds = 3\n".to_string()),
        ("logistic", format!("{LOGISTIC}epochs = 5\nseeds = 0,1,2\nalgorithm = adam_da\n")),
        ("baseline", format!("{LOGISTIC}epochs = 5\nseeds = 4\nalgorithm = adagrad\nlr = 0.1\n")),
    ];
    let mut compared = 0;
    let mut mismatched = Vec::new();
    for (name, text) in &configs {
        let path = dir.path().join(format!("{name}.conf"));
        std::fs::write(&path, text).expect("write config");
        let a = dir.path().join(format!("{name}-a"));
        let b = dir.path().join(format!("{name}-b"));
        for out in [&a, &b] {
            if let Err(e) = invoke_run(&path, out) {
                return Verdict::new(false, format!("{name}: {e}"));
            }
        }
        let mut files: Vec<_> = std::fs::read_dir(&a)
            .expect("output dir")
            .map(|e| e.expect("dir entry").file_name())
            .collect();
        files.sort();
        for f in files {
            compared += 1;
            let left = std::fs::read(a.join(&f)).expect("read");
            let right = std::fs::read(b.join(&f)).unwrap_or_default();
            if left != right {
                mismatched.push(format!("{name}/{}", f.to_string_lossy()));
            }
        }
    }
    Verdict::new(
        mismatched.is_empty() && compared > 0,
        format!(
            "{compared} files from {} configs compared across two executions, {} differ{}",
            configs.len(),
            mismatched.len(),
            if mismatched.is_empty() { String::new() } else { format!(": {}", mismatched.join(", ")) }
        ),
    )
}
