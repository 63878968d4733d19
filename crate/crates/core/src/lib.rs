//! Finite-sample-valid likelihood-ratio inference for incomplete discrete
//! choice models.
//!
//! A model maps a parameter and covariates to a random set of outcomes. The
//! containment functional of that random set pins down every outcome law the
//! model can generate (its core). From it the crate builds least-favorable
//! densities, a tailor-made likelihood, and split-sample / cross-fit
//! likelihood-ratio statistics that are compared against the fixed critical
//! value `1/alpha`.
//!
//! Modules, bottom-up:
//!
//! - [`capacity`]: outcome spaces, subset masks, capacities, cores, Choquet integrals.
//! - [`solvers`]: the feasibility LP, least-favorable and KL programs, closed forms.
//! - [`models`]: entry game, heterogeneous choice sets, panel binary choice.
//! - [`inference`]: estimators, tailor-made likelihood, cross-fit test, confidence sets.
//! - [`simulation`]: DGPs with selection mechanisms and the Monte Carlo harness.

// `!(a <= b)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod error;
pub mod inference;
pub mod models;
pub mod normal;
pub mod rng;
pub mod simulation;
pub mod solvers;

pub use capacity::{
    check_k_monotone, choquet_integral, conjugate, containment_from_random_set, core_membership,
    lower_envelope, Capacity, Density, OutcomeSet, OutcomeSpace, RandomSetDistribution,
};
pub use error::{Error, Result};
pub use inference::{
    confidence_set, crossfit_lr, split_lr, split_sample, CovariateKind, Criterion, Dataset, Decision,
    Functional, GridSpec, HypothesisSpec, LogStat, Observation, SearchBox, SolverRoute, SplitPlan, TestConfig,
    TestRecord,
};
pub use models::{ChoiceModel, ChoiceSetModel, EntryGame, LatentSpec, ModelConfig, PanelBinaryModel};
pub use simulation::{mc_table, power_curve, simulate_dgp, McDesign, McTable, SelectionPolicy};
pub use solvers::{
    entry_game_lfp, feasibility_density, kl_projection, lfp_density, lfp_pair, GameEtas,
    SolveReport, SolveStatus,
};
