//! Confidence sets for functionals by inverting the cross-fit test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::likelihood::{argmax_first, grid_logliks};
use crate::inference::optimize::SearchBox;
use crate::inference::pipeline::{decide, log_mean_exp, log_ratio, LogStat, PreparedDirection, TestConfig};
use crate::inference::{Dataset, Decision, SplitPlan};
use crate::models::ChoiceModel;

/// Default match tolerance between `phi(theta)` and a tested value.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Functional {
    /// `phi(theta) = theta[index]`.
    Coordinate { index: usize },
    /// Entry probability of `player` at covariates `x` with the opponent's
    /// action held at `opponent`.
    CounterfactualEntry { player: usize, opponent: u8, x: Vec<f64> },
}

impl Functional {
    pub fn eval(&self, theta: &[f64], model: &dyn ChoiceModel) -> Result<f64> {
        match self {
            Functional::Coordinate { index } => theta
                .get(*index)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("coordinate {index} out of range"))),
            Functional::CounterfactualEntry { player, opponent, x } => model
                .counterfactual_entry(theta, x, *player, *opponent)
                .unwrap_or_else(|| Err(Error::Model(format!("{} has no counterfactual entry probability", model.name())))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfsetRow {
    pub phi: f64,
    /// Number of nuisance grid points with `phi(theta) = phi`.
    pub null_points: usize,
    /// `ln S_n(phi)`; absent when no grid point matches.
    pub log_s: Option<LogStat>,
    pub retained: bool,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSet {
    pub split: SplitPlan,
    pub alpha: f64,
    pub theta_hat1_forward: Vec<f64>,
    pub theta_hat1_swapped: Vec<f64>,
    pub rows: Vec<ConfsetRow>,
}

impl ConfidenceSet {
    pub fn retained(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| r.retained).map(|r| r.phi).collect()
    }

    pub fn skipped(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| r.skipped).map(|r| r.phi).collect()
    }
}

/// `{phi* : S_n(phi*) <= 1 / alpha}` where the null of `phi*` is the set of
/// nuisance grid points with `|phi(theta) - phi*| <= tolerance`. One split
/// plan and one pair of unrestricted estimates serve every `phi*`.
#[allow(clippy::too_many_arguments)]
pub fn confidence_set(
    data: &Dataset,
    model: &dyn ChoiceModel,
    functional: &Functional,
    phi_grid: &[f64],
    nuisance_grid: &[Vec<f64>],
    tolerance: f64,
    search_box: &SearchBox,
    plan: &SplitPlan,
    config: &TestConfig,
) -> Result<ConfidenceSet> {
    config.validate()?;
    if phi_grid.is_empty() || nuisance_grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let phis: Vec<Option<f64>> = nuisance_grid.iter().map(|t| functional.eval(t, model).ok()).collect();
    let forward = PreparedDirection::new(data, &plan.d0, &plan.d1, model, search_box, config)?;
    let swap = plan.swapped();
    let swapped = PreparedDirection::new(data, &swap.d0, &swap.d1, model, search_box, config)?;
    let directions = [&forward, &swapped].map(|d| {
        (
            d.likelihood.alternative_loglik(),
            grid_logliks(nuisance_grid, &d.likelihood, model),
        )
    });

    let rows = phi_grid
        .iter()
        .map(|&phi| {
            let members: Vec<usize> = phis
                .iter()
                .enumerate()
                .filter(|(_, v)| v.is_some_and(|v| (v - phi).abs() <= tolerance))
                .map(|(i, _)| i)
                .collect();
            if members.is_empty() {
                return ConfsetRow {
                    phi,
                    null_points: 0,
                    log_s: None,
                    retained: false,
                    skipped: true,
                };
            }
            let [a, b] = directions.each_ref().map(|(alt, values)| {
                let sub: Vec<f64> = members.iter().map(|&i| values[i]).collect();
                log_ratio(*alt, sub[argmax_first(&sub)])
            });
            let log_s = log_mean_exp(a, b);
            ConfsetRow {
                phi,
                null_points: members.len(),
                log_s: Some(LogStat(log_s)),
                retained: decide(log_s, config.alpha) == Decision::FailToReject,
                skipped: false,
            }
        })
        .collect();
    Ok(ConfidenceSet {
        split: plan.clone(),
        alpha: config.alpha,
        theta_hat1_forward: forward.estimate.theta.clone(),
        theta_hat1_swapped: swapped.estimate.theta.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::pipeline::{crossfit_lr, lattice, HypothesisSpec};
    use crate::inference::{split_sample, CovariateKind, Observation};
    use crate::models::EntryGame;

    fn sample() -> Dataset {
        let ys = [0, 1, 2, 3, 2, 1, 0, 0, 3, 2, 1, 2, 0, 3, 1, 2, 2, 0, 1, 3, 2, 2];
        Dataset::new(4, ys.iter().map(|&y| Observation { y, x: vec![] }).collect(), CovariateKind::Discrete).unwrap()
    }

    #[test]
    fn rows_match_direct_tests() {
        let d = sample();
        let g = EntryGame::without_covariates();
        let b = SearchBox::new(vec![-2.0, -2.0], vec![0.0, 0.0]).unwrap();
        let grid = lattice(&[-2.0, -2.0], &[0.0, 0.0], &[0.5, 0.5]).unwrap();
        let plan = split_sample(&d, 4).unwrap();
        let config = TestConfig::default();
        let phis = [-2.0, -1.0, 0.0, 0.25];
        let cs = confidence_set(&d, &g, &Functional::Coordinate { index: 0 }, &phis, &grid, 1e-9, &b, &plan, &config).unwrap();
        assert!(cs.rows[3].skipped);
        assert_eq!(cs.skipped(), vec![0.25]);
        for row in &cs.rows[..3] {
            let null: Vec<Vec<f64>> = grid.iter().filter(|t| t[0] == row.phi).cloned().collect();
            let rec = crossfit_lr(&d, &plan, &HypothesisSpec::new(null, b.clone()).unwrap(), &g, &config).unwrap();
            assert_eq!(row.log_s, Some(rec.log_s_n));
            assert_eq!(row.retained, rec.decision == Decision::FailToReject);
        }
    }

    #[test]
    fn tiny_alpha_retains_everything_tested() {
        let d = sample();
        let g = EntryGame::without_covariates();
        let b = SearchBox::new(vec![-2.0, -2.0], vec![0.0, 0.0]).unwrap();
        let grid = lattice(&[-2.0, -2.0], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let plan = split_sample(&d, 1).unwrap();
        let config = TestConfig { alpha: 1e-300, ..TestConfig::default() };
        let f = Functional::CounterfactualEntry { player: 0, opponent: 1, x: vec![] };
        let phis: Vec<f64> = grid.iter().map(|t| f.eval(t, &g).unwrap()).collect();
        let cs = confidence_set(&d, &g, &f, &phis, &grid, 1e-12, &b, &plan, &config).unwrap();
        assert!(cs.rows.iter().all(|r| r.retained || r.log_s.unwrap().0 == f64::INFINITY));
    }

    #[test]
    fn empty_grids_are_errors() {
        let d = sample();
        let g = EntryGame::without_covariates();
        let b = SearchBox::new(vec![-2.0, -2.0], vec![0.0, 0.0]).unwrap();
        let plan = split_sample(&d, 1).unwrap();
        let f = Functional::Coordinate { index: 0 };
        let err = confidence_set(&d, &g, &f, &[], &[vec![0.0, 0.0]], 1e-9, &b, &plan, &TestConfig::default()).unwrap_err();
        assert!(err.to_string().contains("empty grid"));
    }
}
