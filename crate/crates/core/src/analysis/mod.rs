//! Numerical checks of the inequalities and identities behind
//! D-Adaptation, evaluated on recorded runs or raw sequences.
//!
//! Every checker is a pure function returning a [`BoundReport`]. Checks
//! whose preconditions are not met report [`Outcome::Skipped`] rather than
//! failing, so randomized sweeps stay meaningful.
//!
//! Tolerances: identities hold to `1e−8` relative, inequalities to `1e−9`
//! absolute.

mod rates;
mod report;
mod sequences;
mod trajectory_checks;

pub use rates::{check_dasym, check_rate_theorem1, check_rate_theorem2, dasym_threshold, log2_plus};
pub use report::{write_reports, BoundReport, Outcome};
pub use sequences::{check_adagrad_sum, check_log_sum, check_mindk, check_streeter_mcmahan};
pub use trajectory_checks::{
    check_d_envelope, check_d_lower_bound, check_option_dominance, check_option_dominance_run,
    check_snorm_bound, check_telescoping,
};

/// Absolute slack allowed on inequalities.
pub const INEQ_TOL: f64 = 1e-9;
/// Relative tolerance on identities.
pub const IDENTITY_RTOL: f64 = 1e-8;
