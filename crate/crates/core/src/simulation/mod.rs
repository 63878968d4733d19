//! Data-generating processes with explicit selection mechanisms and the
//! Monte Carlo harness for size and power.

mod dgp;
mod montecarlo;

pub use dgp::{simulate_dgp, simulate_replication, SelectionPolicy, SelectionRule, XLaw};
pub use montecarlo::{
    mc_table, power_curve, run_replications, series_from_table, McDesign, McRow, McTable, PowerSeries,
    ReplicationOutcome, TABLE1_H, TABLE2_BETA, TABLE2_H,
};
