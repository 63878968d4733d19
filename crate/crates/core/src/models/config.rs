use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ChoiceModel, ChoiceSetModel, EntryGame, LatentSpec, PanelBinaryModel};

pub const DEFAULT_NODES_PER_DIM: usize = 32;

/// Serializable description of a latent law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LatentConfig {
    /// Independent standard normals in closed form (entry game only).
    Normal,
    GaussHermite {
        #[serde(default = "default_nodes")]
        nodes_per_dim: usize,
    },
    Halton {
        count: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_nodes() -> usize {
    DEFAULT_NODES_PER_DIM
}

fn default_grid_latent() -> LatentConfig {
    LatentConfig::GaussHermite {
        nodes_per_dim: DEFAULT_NODES_PER_DIM,
    }
}

fn default_normal() -> LatentConfig {
    LatentConfig::Normal
}

fn one() -> usize {
    1
}

impl LatentConfig {
    pub fn build(&self, dim: usize) -> Result<LatentSpec> {
        match *self {
            LatentConfig::Normal if dim == 2 => Ok(LatentSpec::BivariateNormalIID),
            LatentConfig::Normal => Err(Error::Model(
                "the closed-form normal latent law is only available for the entry game".into(),
            )),
            LatentConfig::GaussHermite { nodes_per_dim } => LatentSpec::gauss_hermite(dim, nodes_per_dim),
            LatentConfig::Halton { count, seed } => LatentSpec::halton(dim, count, seed),
        }
    }
}

/// Serializable model selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    EntryGame {
        #[serde(default)]
        covariate_dims: [usize; 2],
        #[serde(default = "default_normal")]
        latent: LatentConfig,
    },
    ChoiceSet {
        alternatives: usize,
        kappa: usize,
        #[serde(default = "one")]
        covariate_dim: usize,
        #[serde(default = "default_grid_latent")]
        latent: LatentConfig,
    },
    PanelBinary {
        periods: usize,
        #[serde(default = "one")]
        covariate_dim: usize,
        #[serde(default = "default_grid_latent")]
        latent: LatentConfig,
    },
}

impl ModelConfig {
    pub fn build(&self) -> Result<Arc<dyn ChoiceModel>> {
        Ok(match self {
            ModelConfig::EntryGame { covariate_dims, latent } => {
                Arc::new(EntryGame::new(*covariate_dims, latent.build(2)?)?)
            }
            ModelConfig::ChoiceSet {
                alternatives,
                kappa,
                covariate_dim,
                latent,
            } => Arc::new(ChoiceSetModel::new(
                *alternatives,
                *kappa,
                *covariate_dim,
                latent.build(*alternatives)?,
            )?),
            ModelConfig::PanelBinary {
                periods,
                covariate_dim,
                latent,
            } => Arc::new(PanelBinaryModel::new(*periods, *covariate_dim, latent.build(*periods)?)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_each_family() {
        let game: ModelConfig = serde_json::from_str(r#"{"id":"entry_game"}"#).unwrap();
        assert_eq!(game.build().unwrap().theta_dim(), 2);
        let cs: ModelConfig = serde_json::from_str(
            r#"{"id":"choice_set","alternatives":3,"kappa":2,"latent":{"kind":"gauss_hermite","nodes_per_dim":4}}"#,
        )
        .unwrap();
        assert_eq!(cs.build().unwrap().space().cardinality(), 3);
        let panel: ModelConfig = serde_json::from_str(
            r#"{"id":"panel_binary","periods":2,"latent":{"kind":"halton","count":64}}"#,
        )
        .unwrap();
        assert_eq!(panel.build().unwrap().theta_dim(), 2);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_latents() {
        assert!(serde_json::from_str::<ModelConfig>(r#"{"id":"entry_game","colour":1}"#).is_err());
        let bad: ModelConfig =
            serde_json::from_str(r#"{"id":"choice_set","alternatives":3,"kappa":2,"latent":{"kind":"normal"}}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
