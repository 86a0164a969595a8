use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dadapt::analysis::{write_reports, BoundReport};
use dadapt::harness::{
    d0_sweep, grid_search, run_experiment, run_suite, toy_config, trace_toy, write_atomic,
    write_rows, write_serialized, Algorithm, ExperimentConfig, Suite,
};
use dadapt::{Error, Result};

/// Learning-rate-free D-Adaptation optimizers: experiments, bound checks
/// and toy traces.
#[derive(Debug, Parser)]
#[command(name = "dadapt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct ConfigArgs {
    /// Experiment file of `key = value` lines.
    config: PathBuf,
    /// Override a config key; repeatable, wins over the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self, extra: &[String]) -> Result<ExperimentConfig> {
        let mut overrides = self.set.clone();
        overrides.extend_from_slice(extra);
        ExperimentConfig::load(&self.config)?.with_overrides(&overrides)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every seed of an experiment and write CSVs to its output directory.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory (same as `--set output=DIR`).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Grid-search the learning rate of a baseline.
    Grid {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        lrs: Vec<f64>,
        /// Learning-rate-free method to report alongside the grid.
        #[arg(long)]
        against: Option<String>,
        /// Write the comparison table as CSV.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Rerun a D-Adaptation experiment over several d0 values.
    SweepD0 {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        d0s: Vec<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check the analysis inequalities on generated runs.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Write every report as CSV.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Trace d on the |x| toy problem (x0 = 1, d0 = 0.1).
    TraceToy {
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"))
}

fn execute(command: Command) -> Result<u8> {
    match command {
        Command::Run { config, output } => {
            let extra: Vec<String> = output
                .iter()
                .map(|o| format!("output={}", o.display()))
                .collect();
            let cfg = config.load(&extra)?;
            let result = run_experiment(&cfg)?;
            println!("{:<18} {:>6} {:>14} {:>14} {:>14} {:>14} flags", "run_id", "seed", "final_f", "final_d", "f_average", "f_selected");
            for s in result.summaries() {
                let mut flags = Vec::new();
                if s.diverged {
                    flags.push("diverged");
                }
                if s.heuristic {
                    flags.push("estimated-G");
                }
                if s.out_of_theory {
                    flags.push("d0>D");
                }
                println!(
                    "{:<18} {:>6} {:>14.6e} {:>14} {:>14} {:>14} {}",
                    s.run_id,
                    s.seed,
                    s.final_f,
                    opt(s.final_d),
                    opt(s.f_average),
                    opt(s.f_selected),
                    flags.join(",")
                );
            }
            for a in &result.aggregates {
                println!("{:<12} mean {:.6e} ± {:.2e} (n={})", a.metric, a.mean, a.two_se, a.n);
            }
            for f in &result.files {
                println!("wrote {}", f.display());
            }
            Ok(0)
        }
        Command::Grid {
            config,
            lrs,
            against,
            output,
        } => {
            let cfg = config.load(&[])?;
            let against = against.map(|a| a.parse::<Algorithm>()).transpose()?;
            let result = grid_search(&cfg, &lrs, against)?;
            println!("{:<24} {:>14} {:>10} flags", "point", "final_f", "±2se");
            for p in result.table() {
                let flags = match (p.best, p.diverged, p.lr.is_none()) {
                    (_, _, true) => "reference",
                    (true, _, _) => "best",
                    (_, true, _) => "diverged",
                    _ => "",
                };
                println!("{:<24} {:>14.6e} {:>10.2e} {flags}", p.label, p.final_f, p.two_se);
            }
            if let Some(path) = output {
                write_atomic(&path, |w| write_serialized(result.table().into_iter(), w))?;
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Command::SweepD0 { config, d0s, output } => {
            let cfg = config.load(&[])?;
            let result = d0_sweep(&cfg, &d0s)?;
            println!("{:>10} {:>14} {:>10} {:>12} flags", "d0", "final_f", "±2se", "final_d");
            for p in &result.points {
                let mut flags = Vec::new();
                if p.diverged {
                    flags.push("diverged");
                }
                if p.out_of_theory {
                    flags.push("out-of-theory");
                }
                println!(
                    "{:>10.1e} {:>14.6e} {:>10.2e} {:>12.4e} {}",
                    p.d0,
                    p.final_f,
                    p.two_se,
                    p.final_d,
                    flags.join(",")
                );
            }
            println!("relative spread {:.3e}", result.spread);
            if let Some(path) = output {
                write_atomic(&path, |w| write_serialized(result.points.iter(), w))?;
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Command::Verify { suite, output } => {
            let suite: Suite = suite.parse()?;
            let reports = run_suite(suite)?;
            let violated: Vec<&BoundReport> = reports.iter().filter(|r| !r.acceptable()).collect();
            let skipped = reports.iter().filter(|r| r.skipped_reason().is_some()).count();
            for r in &violated {
                println!("{r}");
            }
            println!(
                "{suite}: {} checks, {} satisfied, {skipped} skipped, {} violated",
                reports.len(),
                reports.len() - skipped - violated.len(),
                violated.len()
            );
            if let Some(path) = output {
                write_atomic(&path, |w| write_reports(&reports, w))?;
                println!("wrote {}", path.display());
            }
            Ok(if violated.is_empty() { 0 } else { 1 })
        }
        Command::TraceToy { steps, output } => {
            if steps == 0 {
                return Err(Error::Config("steps must be positive".into()));
            }
            let run = trace_toy(steps)?;
            match output {
                Some(path) => {
                    write_atomic(&path, |w| write_rows(&run, w))?;
                    eprintln!(
                        "wrote {} ({} steps, final d {:.6})",
                        path.display(),
                        run.rows.len(),
                        run.summary.final_d.unwrap_or(toy_config(steps).d0)
                    );
                }
                None => {
                    let stdout = std::io::stdout();
                    let mut lock = stdout.lock();
                    write_rows(&run, &mut lock)?;
                    lock.flush().map_err(|e| Error::Io {
                        path: "<stdout>".into(),
                        source: e,
                    })?;
                }
            }
            Ok(0)
        }
    }
}
