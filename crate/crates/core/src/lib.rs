//! Learning-rate-free optimization by D-Adaptation.
//!
//! The crate provides
//!
//! * the convex methods in [`dadapt`]: dual averaging, gradient descent and
//!   coordinate-wise AdaGrad, each maintaining a non-decreasing lower bound
//!   `dₖ` on the distance to the solution and using it as the step scale;
//! * the stochastic variants in [`ml`]: SGD with primal averaging and Adam;
//! * numerical verifiers for the inequalities behind the method in
//!   [`analysis`];
//! * test problems and a LIBSVM reader in [`problems`];
//! * a benchmark harness with baselines, grid search and CSV output in
//!   [`harness`].

pub mod analysis;
pub mod dadapt;
pub mod error;
pub mod harness;
pub mod ml;
pub mod problem;
pub mod problems;
pub mod rng;
pub mod schedule;
pub mod trajectory;
pub mod vector;

pub use error::{Error, Result};
pub use problem::Problem;
pub use schedule::Schedule;
pub use trajectory::{RunKind, StepRecord, Trajectory};
