//! Sample criteria for the unrestricted estimator.

use serde::{Deserialize, Serialize};

use crate::capacity::{proper_subsets, Density};
use crate::error::{Error, Result};
use crate::inference::likelihood::{projection_for, SolverRoute};
use crate::inference::Dataset;
use crate::models::ChoiceModel;

/// Floor added to the standard error in the moment criterion.
pub const SE_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Largest studentized violation of the sharp inequalities.
    Moment,
    /// Negative log-likelihood of the projected cell frequencies.
    #[default]
    Mle,
    /// Likelihood of the selection-free statistic alone.
    Entrants,
}

/// Per-cell summaries reused across criterion evaluations.
pub(crate) struct CellSummary {
    pub x: Vec<f64>,
    /// Frequencies over the neighborhood.
    pub freqs: Vec<f64>,
    pub neighbors: usize,
    /// Outcome counts over the cell's own members.
    pub counts: Vec<usize>,
}

pub(crate) fn summarize(data: &Dataset) -> Vec<CellSummary> {
    data.cells()
        .into_iter()
        .map(|c| {
            let mut counts = vec![0; data.outcomes()];
            for &i in &c.members {
                counts[data.observations()[i].y] += 1;
            }
            CellSummary {
                freqs: c.frequencies(data),
                neighbors: c.neighbors.len(),
                counts,
                x: c.x,
            }
        })
        .collect()
}

pub(crate) fn moment_value(theta: &[f64], cells: &[CellSummary], model: &dyn ChoiceModel) -> f64 {
    let m = model.space().cardinality();
    let mut worst: f64 = 0.0;
    for cell in cells {
        let Ok(c) = model.capacity(theta, &cell.x) else {
            return f64::INFINITY;
        };
        for a in proper_subsets(m) {
            let p: f64 = a.iter().map(|y| cell.freqs[y]).sum();
            let gap = c.value(a) - p;
            if gap <= 0.0 {
                continue;
            }
            let se = (p * (1.0 - p) / cell.neighbors as f64).max(0.0).sqrt() + SE_FLOOR;
            worst = worst.max(gap / se);
        }
    }
    worst
}

pub(crate) fn neg_loglik_value(theta: &[f64], cells: &[CellSummary], model: &dyn ChoiceModel, route: SolverRoute) -> f64 {
    let mut total = 0.0;
    for cell in cells {
        let Ok(c) = model.capacity(theta, &cell.x) else {
            return f64::INFINITY;
        };
        let Ok(p_hat) = Density::normalized(cell.freqs.clone()) else {
            return f64::INFINITY;
        };
        let Ok(q) = projection_for(&c, &p_hat, route) else {
            return f64::INFINITY;
        };
        for (y, &k) in cell.counts.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let qy = q.prob(y);
            if qy <= 0.0 {
                return f64::INFINITY;
            }
            total -= k as f64 * qy.ln();
        }
    }
    total
}

pub(crate) fn entrants_value(theta: &[f64], cells: &[CellSummary], model: &dyn ChoiceModel) -> Result<f64> {
    let m = model.space().cardinality();
    let stats: Vec<usize> = (0..m)
        .map(|y| {
            model
                .selection_free_statistic(y)
                .ok_or_else(|| Error::Model(format!("{} has no selection-free statistic", model.name())))
        })
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for cell in cells {
        let law = match model.selection_free_law(theta, &cell.x) {
            Some(Ok(l)) => l,
            Some(Err(_)) => return Ok(f64::INFINITY),
            None => return Err(Error::Model(format!("{} has no selection-free law", model.name()))),
        };
        for (y, &k) in cell.counts.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let p = law[stats[y]];
            if p <= 0.0 {
                return Ok(f64::INFINITY);
            }
            total -= k as f64 * p.ln();
        }
    }
    Ok(total)
}

/// `sup over cells and proper events A of (nu_theta(A|x) - P_hat(A|x))_+ / s_hat`
/// with `s_hat = sqrt(P_hat (1 - P_hat) / n_cell) + 0.01`. Returns `+inf`
/// when the model cannot be evaluated at `theta`.
pub fn moment_criterion(theta: &[f64], data: &Dataset, model: &dyn ChoiceModel) -> f64 {
    moment_value(theta, &summarize(data), model)
}

/// `sum_i -ln q(Y_i | X_i)` where `q(.|x)` is the Kullback-Leibler projection
/// of the cell frequencies onto the core at `theta`; `+inf` when an observed
/// outcome gets zero probability.
pub fn neg_loglik_criterion(theta: &[f64], data: &Dataset, model: &dyn ChoiceModel) -> f64 {
    neg_loglik_value(theta, &summarize(data), model, SolverRoute::Auto)
}

/// Negative log-likelihood of the selection-free statistic (the number of
/// entrants in the entry game). Errors for models without such a statistic.
pub fn entrants_criterion(theta: &[f64], data: &Dataset, model: &dyn ChoiceModel) -> Result<f64> {
    entrants_value(theta, &summarize(data), model)
}

/// Negative empirical entropy `sum_i -ln p_hat(Y_i | X_i)`, the lower bound
/// of [`neg_loglik_criterion`].
pub fn empirical_entropy(data: &Dataset) -> f64 {
    summarize(data)
        .iter()
        .map(|c| {
            c.counts
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(y, &k)| -(k as f64) * c.freqs[y].ln())
                .sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{Capacity, OutcomeSet, RandomSetDistribution};
    use crate::inference::{CovariateKind, Observation};
    use crate::models::EntryGame;
    use approx::assert_abs_diff_eq;
    use rand::RngCore;

    /// Two outcomes without covariates; `theta[0]` is `nu({a})`.
    struct Toy {
        space: crate::capacity::OutcomeSpace,
    }

    impl Toy {
        fn new() -> Self {
            Self {
                space: crate::capacity::OutcomeSpace::new(["a", "b"]).unwrap(),
            }
        }
    }

    impl ChoiceModel for Toy {
        fn name(&self) -> &str {
            "toy"
        }
        fn space(&self) -> &crate::capacity::OutcomeSpace {
            &self.space
        }
        fn theta_dim(&self) -> usize {
            1
        }
        fn covariate_dim(&self) -> usize {
            0
        }
        fn check_theta(&self, _theta: &[f64]) -> Result<()> {
            Ok(())
        }
        fn random_set(&self, theta: &[f64], _x: &[f64]) -> Result<RandomSetDistribution> {
            RandomSetDistribution::new(
                2,
                [(OutcomeSet::singleton(0), theta[0]), (OutcomeSet::full(2), 1.0 - theta[0])],
            )
        }
        fn prediction(&self, _theta: &[f64], _x: &[f64], _u: &[f64]) -> Result<OutcomeSet> {
            Ok(OutcomeSet::full(2))
        }
        fn draw_latent(&self, _rng: &mut dyn RngCore) -> Vec<f64> {
            vec![]
        }
    }

    fn toy_data(na: usize, nb: usize) -> Dataset {
        let obs = (0..na + nb).map(|i| Observation { y: usize::from(i >= na), x: vec![] }).collect();
        Dataset::new(2, obs, CovariateKind::Discrete).unwrap()
    }

    #[test]
    fn moment_single_cell_example() {
        let v = moment_criterion(&[0.6], &toy_data(50, 50), &Toy::new());
        assert_abs_diff_eq!(v, 0.1 / 0.06, epsilon = 1e-12);
    }

    #[test]
    fn moment_vacuous_is_zero() {
        assert_eq!(moment_criterion(&[0.0], &toy_data(3, 40), &Toy::new()), 0.0);
    }

    #[test]
    fn neg_loglik_projection_example() {
        let v = neg_loglik_criterion(&[0.6], &toy_data(50, 50), &Toy::new());
        assert_abs_diff_eq!(v, -50.0 * 0.6f64.ln() - 50.0 * 0.4f64.ln(), epsilon = 1e-7);
        assert_abs_diff_eq!(v, 71.36, epsilon = 5e-3);
    }

    #[test]
    fn neg_loglik_in_core_equals_entropy() {
        let d = toy_data(70, 30);
        let v = neg_loglik_criterion(&[0.6], &d, &Toy::new());
        assert_abs_diff_eq!(v, empirical_entropy(&d), epsilon = 1e-7);
    }

    #[test]
    fn neg_loglik_infinite_on_impossible_outcome() {
        assert_eq!(neg_loglik_criterion(&[1.0], &toy_data(5, 1), &Toy::new()), f64::INFINITY);
    }

    #[test]
    fn entrants_criterion_is_invariant_to_label_swaps() {
        let g = EntryGame::without_covariates();
        let mk = |ys: &[usize]| {
            let obs = ys.iter().map(|&y| Observation { y, x: vec![] }).collect();
            Dataset::new(4, obs, CovariateKind::Discrete).unwrap()
        };
        let a = entrants_criterion(&[-0.4, -1.0], &mk(&[0, 1, 1, 2, 3]), &g).unwrap();
        let b = entrants_criterion(&[-0.4, -1.0], &mk(&[0, 2, 2, 1, 3]), &g).unwrap();
        assert_eq!(a, b);
        assert!(entrants_criterion(&[0.0], &toy_data(1, 1), &Toy::new()).is_err());
    }

    #[test]
    fn toy_capacity_matches_definition() {
        let c = Toy::new().capacity(&[0.3], &[]).unwrap();
        assert_eq!(c, Capacity::new(2, vec![0.0, 0.3, 0.0, 1.0]).unwrap());
    }
}
