use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CovariateKind {
    /// Covariates take finitely many values; each value is its own cell.
    #[default]
    Discrete,
    /// Estimators smooth over the `ceil(sqrt(n))` nearest observations.
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Outcome index in the model's outcome space.
    pub y: usize,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    outcomes: usize,
    observations: Vec<Observation>,
    covariate_kind: CovariateKind,
}

/// Observations sharing one covariate value.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub x: Vec<f64>,
    /// Observations with exactly this covariate value.
    pub members: Vec<usize>,
    /// Observations used to estimate outcome frequencies at this value.
    pub neighbors: Vec<usize>,
}

impl Cell {
    /// Outcome frequencies over the neighborhood.
    pub fn frequencies(&self, data: &Dataset) -> Vec<f64> {
        let mut counts = vec![0.0; data.outcomes];
        for &i in &self.neighbors {
            counts[data.observations[i].y] += 1.0;
        }
        let n = self.neighbors.len() as f64;
        counts.iter().map(|c| c / n).collect()
    }
}

fn cmp_x(a: &[f64], b: &[f64]) -> Ordering {
    for (u, v) in a.iter().zip(b) {
        match u.total_cmp(v) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

impl Dataset {
    pub fn new(outcomes: usize, observations: Vec<Observation>, covariate_kind: CovariateKind) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::Data("empty dataset".into()));
        }
        let dim = observations[0].x.len();
        for (i, o) in observations.iter().enumerate() {
            if o.y >= outcomes {
                return Err(Error::Data(format!("observation {i}: outcome index {} out of range", o.y)));
            }
            if o.x.len() != dim {
                return Err(Error::Data(format!(
                    "observation {i}: {} covariates, expected {dim}",
                    o.x.len()
                )));
            }
            if o.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("observation {i}: non-finite covariate")));
            }
        }
        Ok(Self {
            outcomes,
            observations,
            covariate_kind,
        })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn covariate_kind(&self) -> CovariateKind {
        self.covariate_kind
    }

    pub fn covariate_dim(&self) -> usize {
        self.observations[0].x.len()
    }

    /// The observations at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let obs = indices
            .iter()
            .map(|&i| {
                self.observations
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::Data(format!("index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.outcomes, obs, self.covariate_kind)
    }

    /// Groups observations by exact covariate value, sorted by value.
    /// Neighborhoods are the cell itself for discrete covariates and the
    /// `ceil(sqrt(n))` nearest observations (Euclidean, ties by index) for
    /// continuous ones.
    pub fn cells(&self) -> Vec<Cell> {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| cmp_x(&self.observations[a].x, &self.observations[b].x).then(a.cmp(&b)));
        let mut cells: Vec<Cell> = Vec::new();
        for i in order {
            let x = &self.observations[i].x;
            match cells.last_mut() {
                Some(c) if cmp_x(&c.x, x) == Ordering::Equal => c.members.push(i),
                _ => cells.push(Cell {
                    x: x.clone(),
                    members: vec![i],
                    neighbors: Vec::new(),
                }),
            }
        }
        let k = (n as f64).sqrt().ceil() as usize;
        for c in cells.iter_mut() {
            c.neighbors = match self.covariate_kind {
                CovariateKind::Discrete => c.members.clone(),
                CovariateKind::Continuous => {
                    let mut dist: Vec<(f64, usize)> = (0..n)
                        .map(|j| {
                            let d: f64 = self.observations[j].x.iter().zip(&c.x).map(|(a, b)| (a - b).powi(2)).sum();
                            (d, j)
                        })
                        .collect();
                    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    let mut nb: Vec<usize> = dist.into_iter().take(k.max(c.members.len())).map(|p| p.1).collect();
                    nb.sort_unstable();
                    nb
                }
            };
        }
        cells
    }
}
