use rand::RngCore;

use crate::capacity::{OutcomeSet, OutcomeSpace, RandomSetDistribution};
use crate::error::{Error, Result};
use crate::models::{aggregate_nodes, ChoiceModel, LatentSpec};

pub const MAX_ALTERNATIVES: usize = 12;

/// Multinomial choice where the decision maker picks the best alternative
/// from an unobserved choice set of at least `kappa` alternatives.
///
/// Utilities are `x_j' theta + u_j`; `x` stacks the `J` alternative
/// covariate vectors of length `k`. The predicted set collects every
/// alternative that is optimal in some `kappa`-subset. Outcome `j` is
/// labelled `j + 1`.
#[derive(Debug, Clone)]
pub struct ChoiceSetModel {
    space: OutcomeSpace,
    alternatives: usize,
    kappa: usize,
    k: usize,
    latent: LatentSpec,
}

impl ChoiceSetModel {
    pub fn new(alternatives: usize, kappa: usize, k: usize, latent: LatentSpec) -> Result<Self> {
        if !(2..=MAX_ALTERNATIVES).contains(&alternatives) {
            return Err(Error::Model(format!(
                "number of alternatives must be in 2..={MAX_ALTERNATIVES}, got {alternatives}"
            )));
        }
        if kappa < 2 || kappa > alternatives {
            return Err(Error::Model(format!("kappa must be in 2..={alternatives}, got {kappa}")));
        }
        if latent.nodes().is_none() || latent.dim() != Some(alternatives) {
            return Err(Error::Model(format!(
                "the choice-set model needs fixed latent nodes of dimension {alternatives}"
            )));
        }
        Ok(Self {
            space: OutcomeSpace::new((1..=alternatives).map(|j| j.to_string()))?,
            alternatives,
            kappa,
            k,
            latent,
        })
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    fn utilities(&self, theta: &[f64], x: &[f64], u: &[f64]) -> Vec<f64> {
        (0..self.alternatives)
            .map(|j| {
                let xj = &x[j * self.k..(j + 1) * self.k];
                xj.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>() + u[j]
            })
            .collect()
    }

    /// `j` beats `i` under the lowest-index tie-break.
    fn beats(v: &[f64], j: usize, i: usize) -> bool {
        v[j] > v[i] || (v[j] == v[i] && j < i)
    }

    /// Predicted set by enumerating every `kappa`-subset.
    pub fn prediction_by_enumeration(&self, v: &[f64]) -> OutcomeSet {
        let n = self.alternatives;
        let mut set = OutcomeSet::EMPTY;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != self.kappa {
                continue;
            }
            let members = OutcomeSet(mask);
            let best = members
                .iter()
                .reduce(|b, j| if Self::beats(v, j, b) { j } else { b })
                .expect("nonempty subset");
            set.insert(best);
        }
        set
    }

    /// Predicted set by rank: `j` wins some `kappa`-subset iff it beats at
    /// least `kappa - 1` alternatives.
    pub fn prediction_by_rank(&self, v: &[f64]) -> OutcomeSet {
        let n = self.alternatives;
        OutcomeSet::from_indices((0..n).filter(|&j| (0..n).filter(|&i| i != j && Self::beats(v, j, i)).count() + 1 >= self.kappa))
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.covariate_dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} covariates, got {}",
                self.covariate_dim(),
                x.len()
            )));
        }
        Ok(())
    }
}

impl ChoiceModel for ChoiceSetModel {
    fn name(&self) -> &str {
        "choice_set"
    }

    fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    fn theta_dim(&self) -> usize {
        self.k
    }

    fn covariate_dim(&self) -> usize {
        self.k * self.alternatives
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.k || theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(format!("expected {} finite parameters", self.k)));
        }
        Ok(())
    }

    fn random_set(&self, theta: &[f64], x: &[f64]) -> Result<RandomSetDistribution> {
        self.check_theta(theta)?;
        self.check_x(x)?;
        let nodes = self.latent.nodes().expect("checked at construction");
        aggregate_nodes(self.alternatives, nodes, |u| self.prediction(theta, x, u))
    }

    fn prediction(&self, theta: &[f64], x: &[f64], u: &[f64]) -> Result<OutcomeSet> {
        Ok(self.prediction_by_rank(&self.utilities(theta, x, u)))
    }

    fn draw_latent(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.latent.draw(rng)
    }
}
