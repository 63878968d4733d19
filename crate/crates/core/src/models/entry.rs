use rand::RngCore;

use crate::capacity::{OutcomeSet, OutcomeSpace, RandomSetDistribution};
use crate::error::{Error, Result};
use crate::models::{aggregate_nodes, ChoiceModel, LatentSpec};
use crate::normal;

/// Two-player binary entry game with payoffs
/// `y_j (x_j' delta_j + beta_j y_{-j} + u_j)` and pure-strategy Nash
/// equilibrium predictions.
///
/// Outcomes are ordered `00, 01, 10, 11` (player 1's action first).
/// `theta = [beta_1, beta_2, delta_1 (k1), delta_2 (k2)]` and
/// `x = [x_1 (k1), x_2 (k2)]`.
#[derive(Debug, Clone)]
pub struct EntryGame {
    space: OutcomeSpace,
    dims: [usize; 2],
    latent: LatentSpec,
}

pub const OUT_00: usize = 0;
pub const OUT_01: usize = 1;
pub const OUT_10: usize = 2;
pub const OUT_11: usize = 3;

impl EntryGame {
    pub fn new(dims: [usize; 2], latent: LatentSpec) -> Result<Self> {
        if latent.dim() != Some(2) {
            return Err(Error::Model("the entry game needs a two-dimensional latent law".into()));
        }
        Ok(Self {
            space: OutcomeSpace::new(["00", "01", "10", "11"])?,
            dims,
            latent,
        })
    }

    /// Game without covariates and iid normal latents: `theta = beta`.
    pub fn without_covariates() -> Self {
        Self::new([0, 0], LatentSpec::BivariateNormalIID).expect("valid game")
    }

    pub fn covariate_dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn latent(&self) -> &LatentSpec {
        &self.latent
    }

    /// Entry thresholds `c_j = -x_j' delta_j` and `d_j = c_j - beta_j`.
    fn thresholds(&self, theta: &[f64], x: &[f64]) -> ([f64; 2], [f64; 2]) {
        let [k1, k2] = self.dims;
        let delta1 = &theta[2..2 + k1];
        let delta2 = &theta[2 + k1..2 + k1 + k2];
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        let c1 = -dot(delta1, &x[..k1]);
        let c2 = -dot(delta2, &x[k1..k1 + k2]);
        ([c1, c2], [c1 - theta[0], c2 - theta[1]])
    }

    /// Masses of `{00}, {01}, {10}, {11}, {01, 10}` under iid normal latents.
    pub fn region_masses(&self, theta: &[f64], x: &[f64]) -> Result<[f64; 5]> {
        self.check_theta(theta)?;
        self.check_x(x)?;
        let (c, d) = self.thresholds(theta, x);
        let (pc1, pc2) = (normal::cdf(c[0]), normal::cdf(c[1]));
        let (pd1, pd2) = (normal::cdf(d[0]), normal::cdf(d[1]));
        let m00 = pc1 * pc2;
        let m11 = (1.0 - pd1) * (1.0 - pd2);
        let mult = (pd1 - pc1) * (pd2 - pc2);
        let m10 = (1.0 - pd1) * pd2 + (pd1 - pc1) * pc2;
        let m01 = pc1 * (1.0 - pc2) + (pd1 - pc1) * (1.0 - pd2);
        Ok([m00, m01, m10, m11, mult])
    }

    /// Probability that player `j` enters when the opponent's action is
    /// held at `opponent`: `P(x_j' delta_j + beta_j * opponent + u_j >= 0)`
    /// under a standard normal `u_j`.
    pub fn counterfactual_entry(&self, theta: &[f64], x: &[f64], player: usize, opponent: u8) -> Result<f64> {
        self.check_theta(theta)?;
        self.check_x(x)?;
        if player > 1 {
            return Err(Error::InvalidArgument("player index must be 0 or 1".into()));
        }
        let (c, _) = self.thresholds(theta, x);
        let index = -c[player] + theta[player] * f64::from(opponent);
        Ok(normal::cdf(index))
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

impl ChoiceModel for EntryGame {
    fn name(&self) -> &str {
        "entry_game"
    }

    fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    fn theta_dim(&self) -> usize {
        2 + self.dims[0] + self.dims[1]
    }

    fn covariate_dim(&self) -> usize {
        self.dims[0] + self.dims[1]
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.theta_dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} parameters, got {}",
                self.theta_dim(),
                theta.len()
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("non-finite parameter".into()));
        }
        if theta[0] > 0.0 || theta[1] > 0.0 {
            return Err(Error::Model(format!(
                "interaction effects must be nonpositive, got ({}, {})",
                theta[0], theta[1]
            )));
        }
        Ok(())
    }

    fn random_set(&self, theta: &[f64], x: &[f64]) -> Result<RandomSetDistribution> {
        match &self.latent {
            LatentSpec::BivariateNormalIID => {
                let [m00, m01, m10, m11, mult] = self.region_masses(theta, x)?;
                RandomSetDistribution::new(
                    4,
                    [
                        (OutcomeSet::singleton(OUT_00), m00),
                        (OutcomeSet::singleton(OUT_01), m01),
                        (OutcomeSet::singleton(OUT_10), m10),
                        (OutcomeSet::singleton(OUT_11), m11),
                        (OutcomeSet::from_indices([OUT_01, OUT_10]), mult),
                    ],
                )
            }
            LatentSpec::FixedNodes { nodes, .. } => {
                self.check_theta(theta)?;
                self.check_x(x)?;
                aggregate_nodes(4, nodes, |u| self.prediction(theta, x, u))
            }
        }
    }

    fn prediction(&self, theta: &[f64], x: &[f64], u: &[f64]) -> Result<OutcomeSet> {
        let (c, _) = self.thresholds(theta, x);
        // Player j's payoff from entering is -c_j + beta_j y_{-j} + u_j.
        let enters = |j: usize, other: usize| -c[j] + theta[j] * other as f64 + u[j] >= 0.0;
        let mut set = OutcomeSet::EMPTY;
        for (y1, y2, label) in [(0, 0, OUT_00), (0, 1, OUT_01), (1, 0, OUT_10), (1, 1, OUT_11)] {
            if enters(0, y2) == (y1 == 1) && enters(1, y1) == (y2 == 1) {
                set.insert(label);
            }
        }
        if set.is_empty() {
            return Err(Error::Model("no pure-strategy equilibrium at this latent draw".into()));
        }
        Ok(set)
    }

    fn draw_latent(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.latent.draw(rng)
    }

    /// Number of entrants.
    fn selection_free_statistic(&self, y: usize) -> Option<usize> {
        Some(match y {
            OUT_00 => 0,
            OUT_11 => 2,
            _ => 1,
        })
    }

    fn selection_free_law(&self, theta: &[f64], x: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(self.random_set(theta, x).map(|d| {
            let f00 = d.mass_of(OutcomeSet::singleton(OUT_00));
            let f11 = d.mass_of(OutcomeSet::singleton(OUT_11));
            vec![f00, (1.0 - f00 - f11).max(0.0), f11]
        }))
    }

    fn counterfactual_entry(&self, theta: &[f64], x: &[f64], player: usize, opponent: u8) -> Option<Result<f64>> {
        Some(EntryGame::counterfactual_entry(self, theta, x, player, opponent))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{conjugate, containment_from_random_set};
    use crate::rng::{stream, Purpose};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn symmetric_complete_game() {
        let g = EntryGame::without_covariates();
        let m = g.region_masses(&[0.0, 0.0], &[]).unwrap();
        for v in &m[..4] {
            assert_abs_diff_eq!(*v, 0.25, epsilon = 1e-15);
        }
        assert_eq!(m[4], 0.0);
        let c = g.capacity(&[0.0, 0.0], &[]).unwrap();
        assert!(c.is_additive(1e-12));
    }

    #[test]
    fn reference_masses() {
        let g = EntryGame::without_covariates();
        let m = g.region_masses(&[-1.0, -1.0], &[]).unwrap();
        let expect = [0.25, 0.30417, 0.30417, 0.02518, 0.11651];
        for (a, b) in m.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 5e-5);
        }
        assert_abs_diff_eq!(m.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        let c = g.capacity(&[-1.0, -1.0], &[]).unwrap();
        let star = conjugate(&c);
        let s10 = OutcomeSet::singleton(OUT_10);
        assert_abs_diff_eq!(c.value(s10), m[2], epsilon = 1e-15);
        assert_abs_diff_eq!(star.value(s10), m[2] + m[4], epsilon = 1e-12);
    }

    #[test]
    fn closed_form_matches_equilibrium_enumeration() {
        // Monte Carlo over latent draws with the direct equilibrium check.
        let g = EntryGame::new([1, 1], LatentSpec::BivariateNormalIID).unwrap();
        let theta = [-0.7, -1.3, 0.4, -0.2];
        let x = [1.0, 2.0];
        let masses = g.region_masses(&theta, &x).unwrap();
        let mut rng = stream(5, 0, Purpose::Latent);
        let n = 200_000;
        let mut counts = [0usize; 5];
        for _ in 0..n {
            let u = g.draw_latent(&mut rng);
            let set = g.prediction(&theta, &x, &u).unwrap();
            let k = if set.len() == 2 { 4 } else { set.iter().next().unwrap() };
            counts[k] += 1;
        }
        for k in 0..5 {
            let freq = counts[k] as f64 / n as f64;
            assert!((freq - masses[k]).abs() < 4e-3, "region {k}: {freq} vs {}", masses[k]);
        }
    }

    #[test]
    fn node_latent_matches_closed_form_in_the_limit() {
        let g = EntryGame::new([0, 0], LatentSpec::gauss_hermite(2, 40).unwrap()).unwrap();
        let d = g.random_set(&[-1.0, -1.0], &[]).unwrap();
        let exact = EntryGame::without_covariates().region_masses(&[-1.0, -1.0], &[]).unwrap();
        assert!((d.mass_of(OutcomeSet::singleton(OUT_00)) - exact[0]).abs() < 0.03);
        let total: f64 = d.atoms().iter().map(|a| a.1).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn counterfactual_entry_probability() {
        let g = EntryGame::without_covariates();
        assert_abs_diff_eq!(g.counterfactual_entry(&[-1.0, -0.5], &[], 0, 0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            g.counterfactual_entry(&[-1.0, -0.5], &[], 0, 1).unwrap(),
            normal::cdf(-1.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn rejects_positive_interaction() {
        let g = EntryGame::without_covariates();
        assert!(g.random_set(&[0.1, -1.0], &[]).is_err());
    }

    #[test]
    fn multiplicity_grows_with_interaction() {
        let g = EntryGame::without_covariates();
        let mut prev = -1.0;
        for k in 0..=30 {
            let b = -0.1 * k as f64;
            let mult = g.region_masses(&[b, -0.8], &[]).unwrap()[4];
            assert!(mult >= prev - 1e-15);
            prev = mult;
        }
    }

    #[test]
    fn selection_free_law_matches_statistic() {
        let g = EntryGame::without_covariates();
        let law = g.selection_free_law(&[0.0, 0.0], &[]).unwrap().unwrap();
        assert_abs_diff_eq!(law[1], 0.5, epsilon = 1e-15);
        assert_eq!(g.selection_free_statistic(OUT_01), g.selection_free_statistic(OUT_10));
    }

    proptest! {
        #[test]
        fn masses_partition_the_plane(b1 in -3.0..=0.0f64, b2 in -3.0..=0.0f64, d1 in -2.0..2.0f64, d2 in -2.0..2.0f64, x1 in -2.0..2.0f64, x2 in -2.0..2.0f64) {
            let g = EntryGame::new([1, 1], LatentSpec::BivariateNormalIID).unwrap();
            let m = g.region_masses(&[b1, b2, d1, d2], &[x1, x2]).unwrap();
            prop_assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(m.iter().all(|&v| v >= 0.0));
            let c = containment_from_random_set(&g.random_set(&[b1, b2, d1, d2], &[x1, x2]).unwrap());
            prop_assert!(c.value(OutcomeSet::singleton(OUT_10)) <= 1.0 - c.value(OutcomeSet::singleton(OUT_10).complement(4)) + 1e-12);
        }
    }
}
