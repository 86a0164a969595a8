use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::runner::{run_seed, Instance, SeedRun, SeedSummary, CSV_HEADER};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "DADAPT_WORKERS";

/// Mean and two standard errors of one summary column across seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    pub two_se: f64,
}

impl Aggregate {
    /// `two_se` is 0 for a single value.
    pub fn of(metric: &str, values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let two_se = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            2.0 * (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            metric: metric.to_string(),
            n,
            mean,
            two_se,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub runs: Vec<SeedRun>,
    pub aggregates: Vec<Aggregate>,
    /// Files written, in order.
    pub files: Vec<PathBuf>,
}

impl ExperimentResult {
    pub fn summaries(&self) -> Vec<&SeedSummary> {
        self.runs.iter().map(|r| &r.summary).collect()
    }

    pub fn mean_final_f(&self) -> f64 {
        self.aggregate("final_f").map_or(f64::NAN, |a| a.mean)
    }

    pub fn aggregate(&self, metric: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.metric == metric)
    }

    pub fn any_diverged(&self) -> bool {
        self.runs.iter().any(|r| r.summary.diverged)
    }
}

pub fn aggregate(summaries: &[&SeedSummary]) -> Vec<Aggregate> {
    let mut out = vec![Aggregate::of(
        "final_f",
        &summaries.iter().map(|s| s.final_f).collect::<Vec<_>>(),
    )];
    for (name, get) in [
        ("final_d", (|s: &SeedSummary| s.final_d) as fn(&SeedSummary) -> Option<f64>),
        ("f_average", |s| s.f_average),
        ("f_selected", |s| s.f_selected),
    ] {
        let values: Option<Vec<f64>> = summaries.iter().map(|s| get(s)).collect();
        if let Some(values) = values.filter(|v| !v.is_empty()) {
            out.push(Aggregate::of(name, &values));
        }
    }
    out
}

/// Thread pool sized from [`WORKERS_ENV`], falling back to rayon's default.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::config(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))
}

/// Runs every seed of `config` in parallel. Results are in seed-list order.
pub fn run_seeds(config: &ExperimentConfig) -> Result<Vec<SeedRun>> {
    config.validate()?;
    let instance = Instance::build(config)?;
    let pool = worker_pool()?;
    pool.install(|| {
        config
            .seeds
            .par_iter()
            .map(|&seed| run_seed(config, &instance, seed))
            .collect()
    })
}

/// Runs all seeds and, when `config.output` is set, writes one CSV per
/// seed (`seed-<seed>.csv`), `summary.csv`, `aggregate.csv` and the
/// effective `config.txt` (without the output key).
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let runs = run_seeds(config)?;
    let aggregates = aggregate(&runs.iter().map(|r| &r.summary).collect::<Vec<_>>());
    let mut files = Vec::new();
    if let Some(dir) = &config.output {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for run in &runs {
            let path = dir.join(format!("seed-{}.csv", run.summary.seed));
            write_atomic(&path, |w| write_rows(run, w))?;
            files.push(path);
        }
        let path = dir.join("summary.csv");
        write_atomic(&path, |w| write_serialized(runs.iter().map(|r| &r.summary), w))?;
        files.push(path);
        let path = dir.join("aggregate.csv");
        write_atomic(&path, |w| write_serialized(aggregates.iter(), w))?;
        files.push(path);
        let path = dir.join("config.txt");
        write_atomic(&path, |w| {
            let mut saved = config.clone();
            saved.output = None;
            w.write_all(saved.to_text().as_bytes())
                .map_err(|e| Error::io("config.txt", e))
        })?;
        files.push(path);
    }
    Ok(ExperimentResult {
        config: config.clone(),
        runs,
        aggregates,
        files,
    })
}

pub fn write_rows<W: Write>(run: &SeedRun, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &run.rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn write_serialized<W: Write, T: Serialize>(items: impl Iterator<Item = T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for item in items {
        w.serialize(item)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        body(&mut buf)?;
        buf.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
