use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::capacity::OutcomeSet;
use crate::error::{Error, Result};
use crate::inference::{CovariateKind, Dataset, Observation};
use crate::models::ChoiceModel;
use crate::rng::{stream, Purpose};

/// Rule of [`SelectionPolicy::CovariateDependent`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// First candidate when the covariates sum to a nonnegative value.
    CovariateSign,
    /// First candidate when the first latent coordinate is nonnegative.
    LatentSign,
}

/// How an outcome is picked when the model predicts several. Candidates
/// are ordered by descending outcome index, so in the entry game the first
/// candidate is `10` and the second is `01`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SelectionPolicy {
    /// First candidate with probability `p`, otherwise uniform over the rest.
    FixedProb { p: f64 },
    AlwaysFirst,
    AlwaysSecond,
    CovariateDependent { rule: SelectionRule },
    /// First candidate for even unit indices, second for odd.
    UnitAlternating,
}

impl SelectionPolicy {
    /// The five policies used for size checks.
    pub fn adversarial_suite() -> [SelectionPolicy; 5] {
        [
            SelectionPolicy::AlwaysFirst,
            SelectionPolicy::AlwaysSecond,
            SelectionPolicy::FixedProb { p: 0.5 },
            SelectionPolicy::CovariateDependent {
                rule: SelectionRule::CovariateSign,
            },
            SelectionPolicy::UnitAlternating,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SelectionPolicy::FixedProb { p } if !(0.0..=1.0).contains(&p) => {
                Err(Error::InvalidArgument(format!("selection probability must be in [0, 1], got {p}")))
            }
            _ => Ok(()),
        }
    }

    /// Picks one outcome from `set` for unit `unit`.
    pub fn select<R: Rng + ?Sized>(&self, set: OutcomeSet, unit: usize, x: &[f64], u: &[f64], rng: &mut R) -> usize {
        let mut candidates: Vec<usize> = set.iter().collect();
        candidates.reverse();
        if candidates.len() == 1 {
            return candidates[0];
        }
        let first = |yes: bool| if yes { candidates[0] } else { candidates[1] };
        match *self {
            SelectionPolicy::FixedProb { p } => {
                if rng.gen::<f64>() < p {
                    candidates[0]
                } else {
                    candidates[1 + rng.gen_range(0..candidates.len() - 1)]
                }
            }
            SelectionPolicy::AlwaysFirst => candidates[0],
            SelectionPolicy::AlwaysSecond => candidates[1],
            SelectionPolicy::CovariateDependent {
                rule: SelectionRule::CovariateSign,
            } => first(x.iter().sum::<f64>() >= 0.0),
            SelectionPolicy::CovariateDependent {
                rule: SelectionRule::LatentSign,
            } => first(u.first().is_some_and(|v| *v >= 0.0)),
            SelectionPolicy::UnitAlternating => first(unit & 1 == 0),
        }
    }
}

/// Covariate law of simulated units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum XLaw {
    /// No covariates.
    Empty,
    /// `dim` independent coordinates, each uniform on `values`.
    UniformGrid { values: Vec<f64>, dim: usize },
    /// Unit `i` gets `points[i % points.len()]`.
    Cycle { points: Vec<Vec<f64>> },
}

impl XLaw {
    pub fn validate(&self, covariate_dim: usize) -> Result<()> {
        let dim = match self {
            XLaw::Empty => 0,
            XLaw::UniformGrid { values, dim } => {
                if values.is_empty() && *dim > 0 {
                    return Err(Error::InvalidArgument("covariate support is empty".into()));
                }
                *dim
            }
            XLaw::Cycle { points } => {
                let Some(first) = points.first() else {
                    return Err(Error::InvalidArgument("covariate cycle is empty".into()));
                };
                if points.iter().any(|p| p.len() != first.len()) {
                    return Err(Error::InvalidArgument("covariate cycle points differ in length".into()));
                }
                first.len()
            }
        };
        if dim != covariate_dim {
            return Err(Error::InvalidArgument(format!(
                "covariate law has dimension {dim}, the model expects {covariate_dim}"
            )));
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, unit: usize, rng: &mut R) -> Vec<f64> {
        match self {
            XLaw::Empty => Vec::new(),
            XLaw::UniformGrid { values, dim } => (0..*dim).map(|_| values[rng.gen_range(0..values.len())]).collect(),
            XLaw::Cycle { points } => points[unit % points.len()].clone(),
        }
    }
}

/// Simulates `n` units of replication `rep` under master seed `seed`:
/// covariates, latents and selections each come from their own stream.
pub fn simulate_replication(
    model: &dyn ChoiceModel,
    theta: &[f64],
    x_law: &XLaw,
    selection: SelectionPolicy,
    n: usize,
    seed: u64,
    rep: u64,
) -> Result<Dataset> {
    model.check_theta(theta)?;
    x_law.validate(model.covariate_dim())?;
    selection.validate()?;
    let mut x_rng = stream(seed, rep, Purpose::Covariates);
    let mut u_rng = stream(seed, rep, Purpose::Latent);
    let mut s_rng = stream(seed, rep, Purpose::Selection);
    let mut obs = Vec::with_capacity(n);
    for unit in 0..n {
        let x = x_law.draw(unit, &mut x_rng);
        let u = model.draw_latent(&mut u_rng);
        let set = model.prediction(theta, &x, &u)?;
        if set.is_empty() {
            return Err(Error::Model(format!("{} predicted an empty set", model.name())));
        }
        let y = selection.select(set, unit, &x, &u, &mut s_rng);
        obs.push(Observation { y, x });
    }
    Dataset::new(model.space().cardinality(), obs, CovariateKind::Discrete)
}

/// [`simulate_replication`] for replication 0.
pub fn simulate_dgp(
    model: &dyn ChoiceModel,
    theta: &[f64],
    x_law: &XLaw,
    selection: SelectionPolicy,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    simulate_replication(model, theta, x_law, selection, n, seed, 0)
}
