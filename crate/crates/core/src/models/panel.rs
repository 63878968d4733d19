use rand::RngCore;

use crate::capacity::{OutcomeSet, OutcomeSpace, RandomSetDistribution, MAX_OUTCOMES};
use crate::error::{Error, Result};
use crate::models::{aggregate_nodes, ChoiceModel, LatentSpec};

/// Dynamic binary choice `y_t = 1{x_t' b + gamma y_{t-1} + a + u_t >= 0}`
/// over `T` periods with an unrestricted fixed effect `a` and an
/// unobserved initial condition `y_0`.
///
/// `theta = [b (k), gamma]`, `x` stacks the `T` period covariate vectors.
/// A path `(y_1, ..., y_T)` has index `sum_t y_t 2^(T - t)` and label
/// `"y_1...y_T"`.
#[derive(Debug, Clone)]
pub struct PanelBinaryModel {
    space: OutcomeSpace,
    periods: usize,
    k: usize,
    latent: LatentSpec,
}

impl PanelBinaryModel {
    pub fn new(periods: usize, k: usize, latent: LatentSpec) -> Result<Self> {
        if periods < 2 || (1usize << periods) > MAX_OUTCOMES {
            return Err(Error::Model(format!(
                "panel length must be at least 2 with at most {MAX_OUTCOMES} paths, got T = {periods}"
            )));
        }
        if latent.nodes().is_none() || latent.dim() != Some(periods) {
            return Err(Error::Model(format!(
                "the panel model needs fixed latent nodes of dimension {periods}"
            )));
        }
        let labels = (0..1usize << periods).map(|idx| {
            (0..periods)
                .map(|t| if idx >> (periods - 1 - t) & 1 == 1 { '1' } else { '0' })
                .collect::<String>()
        });
        Ok(Self {
            space: OutcomeSpace::new(labels)?,
            periods,
            k,
            latent,
        })
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    fn index(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        (0..self.periods)
            .map(|t| {
                x[t * self.k..(t + 1) * self.k]
                    .iter()
                    .zip(theta)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    fn path(&self, g: &[f64], gamma: f64, u: &[f64], a: f64, y0: u8) -> usize {
        let mut prev = f64::from(y0);
        let mut idx = 0;
        for t in 0..self.periods {
            let y = g[t] + gamma * prev + a + u[t] >= 0.0;
            idx = (idx << 1) | usize::from(y);
            prev = if y { 1.0 } else { 0.0 };
        }
        idx
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

impl ChoiceModel for PanelBinaryModel {
    fn name(&self) -> &str {
        "panel_binary"
    }

    fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    fn theta_dim(&self) -> usize {
        self.k + 1
    }

    fn covariate_dim(&self) -> usize {
        self.k * self.periods
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.k + 1 || theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(format!("expected {} finite parameters", self.k + 1)));
        }
        Ok(())
    }

    fn random_set(&self, theta: &[f64], x: &[f64]) -> Result<RandomSetDistribution> {
        self.check_theta(theta)?;
        self.check_x(x)?;
        let nodes = self.latent.nodes().expect("checked at construction");
        aggregate_nodes(self.space.cardinality(), nodes, |u| self.prediction(theta, x, u))
    }

    /// Sweeps the fixed effect over the real line: the path is constant
    /// between consecutive breakpoints, so one point per interval suffices.
    fn prediction(&self, theta: &[f64], x: &[f64], u: &[f64]) -> Result<OutcomeSet> {
        let gamma = theta[self.k];
        let g = self.index(theta, x);
        let mut breaks: Vec<f64> = (0..self.periods)
            .flat_map(|t| [-g[t] - u[t], -g[t] - gamma - u[t]])
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut points = vec![breaks[0] - 1.0];
        points.extend(breaks.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        points.push(breaks[breaks.len() - 1] + 1.0);
        let mut set = OutcomeSet::EMPTY;
        for &a in &points {
            for y0 in [0, 1] {
                set.insert(self.path(&g, gamma, u, a, y0));
            }
        }
        Ok(set)
    }

    fn draw_latent(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.latent.draw(rng)
    }
}
