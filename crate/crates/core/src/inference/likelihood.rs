//! Tailor-made likelihood built from least-favorable densities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{Capacity, Density};
use crate::error::{Error, Result};
use crate::inference::Dataset;
use crate::models::ChoiceModel;
use crate::solvers::{
    closed_form_lfp, closed_form_projection, feasibility_density, kl_projection, lfp_density, relative_interior_point,
    ZERO_PLAUSIBILITY,
};

/// Which solver computes least-favorable densities and projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverRoute {
    /// Closed form when the capacity has at most one pair focal set,
    /// interior-point solver otherwise.
    #[default]
    Auto,
    /// Always the interior-point solver.
    Generic,
}

/// Least-favorable density in the core of `c` against `p`.
pub fn lfp_for(c: &Capacity, p: &Density, route: SolverRoute) -> Result<Density> {
    if route == SolverRoute::Auto {
        if let Some(q) = closed_form_lfp(c, p) {
            return Ok(q);
        }
    }
    lfp_density(c, p).map(|(q, _)| q)
}

/// Kullback-Leibler projection of `p_hat` onto the core of `c`.
pub fn projection_for(c: &Capacity, p_hat: &Density, route: SolverRoute) -> Result<Density> {
    if route == SolverRoute::Auto {
        if let Some(q) = closed_form_projection(c, p_hat) {
            return Ok(q);
        }
    }
    kl_projection(p_hat, c).map(|(q, _)| q)
}

/// The alternative density at `x`: a strictly positive element of the core
/// at `theta_hat1`. When some outcome is impossible at `theta_hat1` no such
/// element exists and the relative interior point is used, which puts zero
/// mass on the impossible outcomes.
pub fn representative_density(theta_hat1: &[f64], model: &dyn ChoiceModel, x: &[f64]) -> Result<Density> {
    let c = model.capacity(theta_hat1, x)?;
    match feasibility_density(&c) {
        Err(Error::Infeasible(_)) => relative_interior_point(&c),
        other => other,
    }
}

#[derive(Debug, Clone)]
struct LikelihoodCell {
    x: Vec<f64>,
    /// Outcome counts in the cell.
    counts: Vec<usize>,
    p: Density,
}

/// The likelihood half of a split with one alternative density per
/// distinct covariate value.
#[derive(Debug, Clone)]
pub struct TailoredLikelihood {
    cells: Vec<LikelihoodCell>,
    route: SolverRoute,
}

impl TailoredLikelihood {
    /// Alternative densities from [`representative_density`] at `theta_hat1`.
    pub fn new(data_d0: &Dataset, theta_hat1: &[f64], model: &dyn ChoiceModel, route: SolverRoute) -> Result<Self> {
        let xs: Vec<Vec<f64>> = data_d0.cells().into_iter().map(|c| c.x).collect();
        let densities = xs
            .iter()
            .map(|x| representative_density(theta_hat1, model, x))
            .collect::<Result<Vec<_>>>()?;
        Self::with_densities(data_d0, densities, route)
    }

    /// Alternative densities supplied per cell, in the order of
    /// [`Dataset::cells`].
    pub fn with_densities(data_d0: &Dataset, densities: Vec<Density>, route: SolverRoute) -> Result<Self> {
        let cells = data_d0.cells();
        if densities.len() != cells.len() {
            return Err(Error::InvalidArgument(format!(
                "{} densities for {} covariate cells",
                densities.len(),
                cells.len()
            )));
        }
        let cells = cells
            .into_iter()
            .zip(densities)
            .map(|(c, p)| {
                if p.len() != data_d0.outcomes() {
                    return Err(Error::InvalidArgument("density length differs from the outcome count".into()));
                }
                let mut counts = vec![0; data_d0.outcomes()];
                for &i in &c.members {
                    counts[data_d0.observations()[i].y] += 1;
                }
                Ok(LikelihoodCell { x: c.x, counts, p })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { cells, route })
    }

    /// The alternative density at covariate value `x`.
    pub fn alternative(&self, x: &[f64]) -> Option<&Density> {
        self.cells.iter().find(|c| c.x == x).map(|c| &c.p)
    }

    /// `sum_i ln p(Y_i | X_i)`, the log-likelihood at the estimate that
    /// produced the alternative densities.
    pub fn alternative_loglik(&self) -> f64 {
        let mut total = 0.0;
        for c in &self.cells {
            for (y, &k) in c.counts.iter().enumerate() {
                if k > 0 {
                    total += k as f64 * c.p.prob(y).ln();
                }
            }
        }
        total
    }

    /// Least-favorable density at `theta` for each cell, or `None` when
    /// an observed outcome is impossible at `theta` or `theta` is outside
    /// the parameter space.
    pub fn lfp_densities(&self, theta: &[f64], model: &dyn ChoiceModel) -> Option<Vec<Density>> {
        self.cells.iter().map(|c| self.cell_lfp(c, theta, model)).collect()
    }

    fn cell_lfp(&self, cell: &LikelihoodCell, theta: &[f64], model: &dyn ChoiceModel) -> Option<Density> {
        let cap = model.capacity(theta, &cell.x).ok()?;
        let m = cap.cardinality();
        let support: Vec<bool> = (0..m).map(|y| cap.plausibility(y) > ZERO_PLAUSIBILITY).collect();
        if (0..m).any(|y| cell.counts[y] > 0 && !support[y]) {
            return None;
        }
        // The alternative conditioned on the outcomes possible at theta.
        let restricted: Vec<f64> = (0..m).map(|y| if support[y] { cell.p.prob(y) } else { 0.0 }).collect();
        let q = if restricted.iter().sum::<f64>() > 0.0 {
            lfp_for(&cap, &Density::normalized(restricted).ok()?, self.route).ok()?
        } else {
            relative_interior_point(&cap).ok()?
        };
        if (0..m).any(|y| cell.counts[y] > 0 && q.prob(y) <= 0.0) {
            return None;
        }
        Some(q)
    }

    /// Per-observation `(ln p(Y_i | X_i), ln q_theta(Y_i | X_i))` for the
    /// observations of `data_d0`, in order. The second entry is `-inf` for
    /// every observation when the likelihood at `theta` is zero.
    pub fn observation_logs(&self, data_d0: &Dataset, theta: &[f64], model: &dyn ChoiceModel) -> Vec<(f64, f64)> {
        let q = self.lfp_densities(theta, model);
        data_d0
            .observations()
            .iter()
            .map(|o| {
                let k = self.cells.iter().position(|c| c.x == o.x);
                let ln_p = k.map_or(f64::NAN, |k| self.cells[k].p.prob(o.y).ln());
                let ln_q = match (&q, k) {
                    (Some(q), Some(k)) => q[k].prob(o.y).ln(),
                    _ => f64::NEG_INFINITY,
                };
                (ln_p, ln_q)
            })
            .collect()
    }

    /// `sum_i ln q_theta(Y_i | X_i)`; `-inf` when an observed outcome has
    /// zero least-favorable probability.
    pub fn loglik(&self, theta: &[f64], model: &dyn ChoiceModel) -> f64 {
        let mut total = 0.0;
        for c in &self.cells {
            let Some(q) = self.cell_lfp(c, theta, model) else {
                return f64::NEG_INFINITY;
            };
            for (y, &k) in c.counts.iter().enumerate() {
                if k > 0 {
                    total += k as f64 * q.prob(y).ln();
                }
            }
        }
        total
    }
}

/// `sum_{i in D0} ln q_theta(Y_i | X_i)` with `p_per_cell` listed in the
/// order of [`Dataset::cells`] of `data_d0`.
pub fn tailor_made_loglik(theta: &[f64], data_d0: &Dataset, p_per_cell: &[Density], model: &dyn ChoiceModel) -> Result<f64> {
    let lik = TailoredLikelihood::with_densities(data_d0, p_per_cell.to_vec(), SolverRoute::Auto)?;
    Ok(lik.loglik(theta, model))
}

/// Restricted maximum likelihood over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedFit {
    pub index: usize,
    pub theta: Vec<f64>,
    pub loglik: f64,
}

/// Index of the largest value; ties go to the lowest index and an all
/// `-inf` list selects index 0.
pub fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Log-likelihood at every grid point, evaluated in parallel.
pub fn grid_logliks(grid: &[Vec<f64>], lik: &TailoredLikelihood, model: &dyn ChoiceModel) -> Vec<f64> {
    grid.par_iter().map(|t| lik.loglik(t, model)).collect()
}

/// Maximizer of the tailor-made likelihood over `grid`.
pub fn restricted_mle(grid: &[Vec<f64>], lik: &TailoredLikelihood, model: &dyn ChoiceModel) -> Result<RestrictedFit> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty parameter grid".into()));
    }
    let values = grid_logliks(grid, lik, model);
    let index = argmax_first(&values);
    Ok(RestrictedFit {
        index,
        theta: grid[index].clone(),
        loglik: values[index],
    })
}
