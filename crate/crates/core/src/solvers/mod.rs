//! Convex programs over cores of capacities.
//!
//! - [`feasibility_density`]: a strictly positive core element chosen by a
//!   lexicographic max-min-slack LP.
//! - [`lfp_density`]: the least-favorable density against a fixed alternative.
//! - [`kl_projection`]: the Kullback-Leibler projection of a frequency vector.
//! - [`lfp_pair`]: the joint least-favorable pair when both hypotheses are composite.
//! - [`entry_game_lfp`] and [`closed_form_lfp`]: closed forms for capacities
//!   whose only non-singleton focal set is a pair.

pub mod barrier;
mod closed_form;
pub mod lp;
mod programs;

use serde::{Deserialize, Serialize};

pub use closed_form::{closed_form_lfp, closed_form_projection, entry_game_lfp, entry_game_projection, GameEtas, GameRegime};
pub use programs::{feasibility_density, kl_projection, lfp_density, lfp_pair, relative_interior_point, ZERO_PLAUSIBILITY};

/// KKT residual required for [`SolveStatus::Converged`].
pub const KKT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub objective: f64,
    /// Max norm of the stationarity and complementarity residuals.
    pub kkt_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}
