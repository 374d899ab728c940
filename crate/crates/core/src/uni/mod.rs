//! Univariate estimators: refinement step, constrained estimator with the
//! log-log confidence schedule, classical kickstart, median boosting, median of
//! means, and a relative-error estimator for variables in `[0, 1]`.
//!
//! Phase estimation inside the estimators draws from the exact outcome law
//! `P(m) = Σ_j w_j·F_N(α_j/2π − m/N)` built from the Grover spectrum, where
//! `F_N` is the Fejér kernel; it equals the register readout of the circuit.

mod boost;
mod classical;
mod refine;

pub use boost::{
    ceil_log2_rounds, check_unit_interval, loglog_cost_bound, loglog_deltas, loglog_schedule, median, median_boost,
    median_boost_count, pow2_ceil, Schedule,
};
pub use classical::{median_of_means, MomPlan};
pub use refine::{
    bounded_rel_estimator, constrained_rounds, constrained_uni, median_of_means_rv, notso_uni, refine_resolution,
    refine_s0, refine_uni, ConstrainedPlan, EstimateReport, RefinePlan,
};

pub(crate) use refine::{bounded_rel_core, constrained_core};
