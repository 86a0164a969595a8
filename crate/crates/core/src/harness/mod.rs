//! Experiment configuration, baselines, the parallel runner, and the
//! desk-scale studies behind the command-line tool.

mod baselines;
mod config;
mod experiment;
mod runner;
mod study;
mod toy;
mod verify;

pub use baselines::{adagrad_norm_step, fixed_step_run, polyak_step, AdaGrad, AdaGradNormAcc, FixedStepRun};
pub use config::{parse_key_values, Algorithm, ExperimentConfig, GModeSpec, ProblemSpec};
pub use experiment::{
    aggregate, run_experiment, run_seeds, worker_pool, write_atomic, write_rows, write_serialized,
    Aggregate, ExperimentResult, WORKERS_ENV,
};
pub use runner::{run_seed, CsvRow, Instance, SeedRun, SeedSummary, CSV_HEADER, DIVERGENCE_NORM};
pub use study::{d0_sweep, grid_search, GridPoint, GridResult, SweepPoint, SweepResult};
pub use toy::{toy_config, trace_toy};
pub use verify::{run_suite, Suite};
