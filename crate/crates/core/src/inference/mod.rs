//! The universal test: sample splitting, the unrestricted estimator, the
//! tailor-made likelihood, split and cross-fit likelihood ratios, and
//! confidence sets by test inversion.

mod confset;
mod criteria;
mod data;
mod likelihood;
pub mod optimize;
mod pipeline;
mod split;

pub use confset::{confidence_set, ConfidenceSet, ConfsetRow, Functional, DEFAULT_TOLERANCE};
pub use criteria::{empirical_entropy, entrants_criterion, moment_criterion, neg_loglik_criterion, Criterion, SE_FLOOR};
pub use data::{Cell, CovariateKind, Dataset, Observation};
pub use likelihood::{
    argmax_first, grid_logliks, lfp_for, projection_for, representative_density, restricted_mle, tailor_made_loglik,
    RestrictedFit, SolverRoute, TailoredLikelihood,
};
pub use optimize::{Optimum, SearchBox};
pub use pipeline::{
    combine, crossfit_lr, decide, lattice, log_mean_exp, log_ratio, split_lr, unrestricted_estimate, Decision,
    DirectionRecord, GridSpec, HypothesisSpec, LogStat, PreparedDirection, TestConfig, TestRecord, TraceEntry, DEFAULT_SEED,
};
pub use split::{split_sample, SplitPlan};
