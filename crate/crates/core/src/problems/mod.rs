//! Test problems with exact oracles and the logistic-regression data path.

mod abs;
mod dataset;
mod libsvm;
mod logistic;
mod piecewise;
mod synth;

pub use abs::AbsValueProblem;
pub use dataset::{Dataset, Example};
pub use libsvm::{parse_libsvm, read_libsvm, serialize_libsvm};
pub use logistic::{logistic_value_grad, BatchSampler, LogisticProblem};
pub use piecewise::PiecewiseMaxProblem;
pub use synth::{synth_dataset, SynthSpec};
