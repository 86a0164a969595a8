use crate::error::Result;

use super::config::ExperimentConfig;
use super::runner::{run_seed, Instance, SeedRun};

/// The `|x|` toy problem: `x0 = 1`, `d0 = 0.1`, dual averaging with
/// Option I.
pub fn toy_config(steps: usize) -> ExperimentConfig {
    ExperimentConfig {
        name: "toy".to_string(),
        x0: 1.0,
        d0: 0.1,
        steps: Some(steps),
        record_every: Some(1),
        ..ExperimentConfig::default()
    }
}

pub fn trace_toy(steps: usize) -> Result<SeedRun> {
    let config = toy_config(steps);
    let instance = Instance::build(&config)?;
    run_seed(&config, &instance, 0)
}
