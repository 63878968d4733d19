//! Model families mapping a parameter and covariates to the law of a
//! predicted outcome set.

mod choice_set;
mod config;
mod entry;
mod latent;
mod panel;

use rand::RngCore;

use crate::capacity::{containment_from_random_set, Capacity, OutcomeSet, OutcomeSpace, RandomSetDistribution};
use crate::error::Result;

pub use choice_set::ChoiceSetModel;
pub use config::{LatentConfig, ModelConfig};
pub use entry::EntryGame;
pub use latent::{hermite_rule, LatentSpec, Node};
pub use panel::PanelBinaryModel;

/// An incomplete model: for each `(theta, x)` a law over predicted sets.
pub trait ChoiceModel: Send + Sync {
    fn name(&self) -> &str;

    fn space(&self) -> &OutcomeSpace;

    fn theta_dim(&self) -> usize;

    fn covariate_dim(&self) -> usize;

    /// Whether `theta` lies in the parameter space.
    fn check_theta(&self, theta: &[f64]) -> Result<()>;

    fn random_set(&self, theta: &[f64], x: &[f64]) -> Result<RandomSetDistribution>;

    fn capacity(&self, theta: &[f64], x: &[f64]) -> Result<Capacity> {
        Ok(containment_from_random_set(&self.random_set(theta, x)?))
    }

    /// Predicted set at a single latent draw.
    fn prediction(&self, theta: &[f64], x: &[f64], u: &[f64]) -> Result<OutcomeSet>;

    /// Draws a latent vector from the model's latent law.
    fn draw_latent(&self, rng: &mut dyn RngCore) -> Vec<f64>;

    /// A statistic of the outcome whose law is the same for every selection
    /// mechanism, if the model has one: its value at outcome `y`.
    fn selection_free_statistic(&self, _y: usize) -> Option<usize> {
        None
    }

    /// Law of [`ChoiceModel::selection_free_statistic`] under `(theta, x)`.
    fn selection_free_law(&self, _theta: &[f64], _x: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }

    /// Entry probability of `player` with the opponent's action held at
    /// `opponent`, for models of strategic entry.
    fn counterfactual_entry(&self, _theta: &[f64], _x: &[f64], _player: usize, _opponent: u8) -> Option<Result<f64>> {
        None
    }
}

/// Aggregates node weights by predicted set.
pub(crate) fn aggregate_nodes(
    m: usize,
    nodes: &[Node],
    mut predict: impl FnMut(&[f64]) -> Result<OutcomeSet>,
) -> Result<RandomSetDistribution> {
    let mut atoms = Vec::with_capacity(nodes.len());
    for n in nodes {
        atoms.push((predict(&n.point)?, n.weight));
    }
    RandomSetDistribution::new(m, atoms)
}
