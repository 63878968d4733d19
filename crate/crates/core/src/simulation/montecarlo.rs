use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{
    crossfit_lr, Criterion, Decision, GridSpec, HypothesisSpec, LogStat, SearchBox, SolverRoute, SplitPlan, TestConfig,
    DEFAULT_SEED,
};
use crate::models::{ChoiceModel, LatentConfig, ModelConfig};
use crate::rng::{stream, Purpose};
use crate::simulation::{simulate_replication, SelectionPolicy, XLaw};

/// Alternatives of the no-covariate entry-game table.
pub const TABLE1_H: [f64; 15] = [
    0.0, 0.069, 0.138, 0.207, 0.276, 0.345, 0.414, 0.483, 0.552, 0.621, 0.690, 0.759, 0.828, 0.897, 0.966,
];

/// Alternatives of the entry-game-with-covariates table.
pub const TABLE2_H: [f64; 15] = [
    0.0, 0.105, 0.211, 0.316, 0.421, 0.526, 0.632, 0.737, 0.842, 0.947, 1.053, 1.158, 1.263, 1.368, 1.474,
];

/// Interaction effect of the covariate design under the alternatives.
pub const TABLE2_BETA: f64 = -0.5;

/// A Monte Carlo size/power experiment. The truth at alternative `h` is
/// `base + h * direction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McDesign {
    pub model: ModelConfig,
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
    pub h_grid: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    pub criteria: Vec<Criterion>,
    pub replications: usize,
    pub alpha: f64,
    pub selection: SelectionPolicy,
    pub x_law: XLaw,
    pub null_grid: GridSpec,
    pub search_box: SearchBox,
    pub seed: u64,
    #[serde(default)]
    pub route: SolverRoute,
}

impl McDesign {
    /// Entry game without covariates: truth `beta = (-h, -h)`, null `beta = 0`.
    pub fn table1(n: usize, criterion: Criterion, h_grid: Vec<f64>, replications: usize) -> Self {
        Self {
            model: ModelConfig::EntryGame {
                covariate_dims: [0, 0],
                latent: LatentConfig::Normal,
            },
            base: vec![0.0, 0.0],
            direction: vec![-1.0, -1.0],
            h_grid,
            sample_sizes: vec![n],
            criteria: vec![criterion],
            replications,
            alpha: 0.05,
            selection: SelectionPolicy::FixedProb { p: 0.5 },
            x_law: XLaw::Empty,
            null_grid: GridSpec::Points {
                points: vec![vec![0.0, 0.0]],
            },
            search_box: SearchBox {
                lower: vec![-3.0, -3.0],
                upper: vec![0.0, 0.0],
            },
            seed: DEFAULT_SEED,
            route: SolverRoute::Auto,
        }
    }

    /// Entry game with one five-point covariate per player: truth
    /// `beta = (-0.5, -0.5)`, `delta = (h, h)`; null `delta = 0` with `beta`
    /// on a 0.25-step lattice over `[-2, 0]^2`.
    pub fn table2(n: usize, h_grid: Vec<f64>, replications: usize) -> Self {
        Self {
            model: ModelConfig::EntryGame {
                covariate_dims: [1, 1],
                latent: LatentConfig::Normal,
            },
            base: vec![TABLE2_BETA, TABLE2_BETA, 0.0, 0.0],
            direction: vec![0.0, 0.0, 1.0, 1.0],
            h_grid,
            sample_sizes: vec![n],
            criteria: vec![Criterion::Moment],
            replications,
            alpha: 0.05,
            selection: SelectionPolicy::FixedProb { p: 0.5 },
            x_law: XLaw::UniformGrid {
                values: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
                dim: 2,
            },
            null_grid: GridSpec::Lattice {
                lower: vec![-2.0, -2.0, 0.0, 0.0],
                upper: vec![0.0, 0.0, 0.0, 0.0],
                step: vec![0.25, 0.25, 0.0, 0.0],
            },
            search_box: SearchBox {
                lower: vec![-2.0, -2.0, -2.0, -2.0],
                upper: vec![0.0, 0.0, 2.0, 2.0],
            },
            seed: DEFAULT_SEED,
            route: SolverRoute::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidArgument("replications must be at least 1".into()));
        }
        if self.h_grid.is_empty() || self.sample_sizes.is_empty() || self.criteria.is_empty() {
            return Err(Error::InvalidArgument("empty grid".into()));
        }
        if self.base.len() != self.direction.len() || self.base.len() != self.search_box.dim() {
            return Err(Error::InvalidArgument("base, direction and search box differ in dimension".into()));
        }
        if self.sample_sizes.iter().any(|&n| n < 2) {
            return Err(Error::InvalidArgument("sample sizes must be at least 2".into()));
        }
        SearchBox::new(self.search_box.lower.clone(), self.search_box.upper.clone())?;
        self.selection.validate()?;
        self.config(Criterion::Mle).validate()?;
        Ok(())
    }

    pub fn truth(&self, h: f64) -> Vec<f64> {
        self.base.iter().zip(&self.direction).map(|(b, d)| b + h * d).collect()
    }

    pub fn config(&self, criterion: Criterion) -> TestConfig {
        TestConfig {
            alpha: self.alpha,
            criterion,
            route: self.route,
            optimizer_seed: self.seed,
        }
    }
}

/// Statistics of one simulated cross-fit test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub rep: u64,
    pub log_t_n: LogStat,
    pub log_t_n_swap: LogStat,
    pub log_s_n: LogStat,
    pub decision: Decision,
}

/// Runs replications `0..design.replications` at sample size `n` and
/// alternative `h`. Replication `r` draws its data and split from streams
/// keyed by `(design.seed, r)`, so it does not depend on the others.
pub fn run_replications(
    design: &McDesign,
    model: &dyn ChoiceModel,
    n: usize,
    criterion: Criterion,
    h: f64,
) -> Result<Vec<ReplicationOutcome>> {
    let hyp = HypothesisSpec::new(design.null_grid.points()?, design.search_box.clone())?;
    let theta = design.truth(h);
    let config = design.config(criterion);
    (0..design.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let data = simulate_replication(model, &theta, &design.x_law, design.selection, n, design.seed, rep)?;
            let plan = SplitPlan::random(n, design.seed, &mut stream(design.seed, rep, Purpose::Split))?;
            let rec = crossfit_lr(&data, &plan, &hyp, model, &config)?;
            Ok(ReplicationOutcome {
                rep,
                log_t_n: rec.log_t_n,
                log_t_n_swap: rec.log_t_n_swap,
                log_s_n: rec.log_s_n,
                decision: rec.decision,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub n: usize,
    pub criterion: Criterion,
    pub h: f64,
    pub power: f64,
    /// Binomial standard error `sqrt(power (1 - power) / reps)`.
    pub mc_se: f64,
    pub reps: usize,
    pub rejections: usize,
    pub mean_t_n: f64,
    pub mean_t_n_swap: f64,
    pub mean_s_n: f64,
}

impl McRow {
    pub fn from_outcomes(n: usize, criterion: Criterion, h: f64, outcomes: &[ReplicationOutcome]) -> Self {
        let reps = outcomes.len();
        let rejections = outcomes.iter().filter(|o| o.decision == Decision::Reject).count();
        let power = rejections as f64 / reps as f64;
        let mean = |f: fn(&ReplicationOutcome) -> LogStat| outcomes.iter().map(|o| f(o).exp()).sum::<f64>() / reps as f64;
        Self {
            n,
            criterion,
            h,
            power,
            mc_se: (power * (1.0 - power) / reps as f64).sqrt(),
            reps,
            rejections,
            mean_t_n: mean(|o| o.log_t_n),
            mean_t_n_swap: mean(|o| o.log_t_n_swap),
            mean_s_n: mean(|o| o.log_s_n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McTable {
    pub rows: Vec<McRow>,
}

impl McTable {
    pub fn row(&self, n: usize, criterion: Criterion, h: f64) -> Option<&McRow> {
        self.rows.iter().find(|r| r.n == n && r.criterion == criterion && r.h == h)
    }
}

/// Rejection rates for every `(n, criterion, h)` of the design, in that
/// nesting order.
pub fn mc_table(design: &McDesign) -> Result<McTable> {
    design.validate()?;
    let model = design.model.build()?;
    let mut rows = Vec::new();
    for &n in &design.sample_sizes {
        for &criterion in &design.criteria {
            for &h in &design.h_grid {
                let outcomes = run_replications(design, model.as_ref(), n, criterion, h)?;
                rows.push(McRow::from_outcomes(n, criterion, h, &outcomes));
            }
        }
    }
    Ok(McTable { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    pub n: usize,
    pub criterion: Criterion,
    /// `(h, power)` in the order of the design's grid.
    pub points: Vec<(f64, f64)>,
}

/// [`mc_table`] regrouped as one `(h, power)` series per `(n, criterion)`.
pub fn power_curve(design: &McDesign) -> Result<Vec<PowerSeries>> {
    Ok(series_from_table(&mc_table(design)?))
}

pub fn series_from_table(table: &McTable) -> Vec<PowerSeries> {
    let mut out: Vec<PowerSeries> = Vec::new();
    for r in &table.rows {
        match out.iter_mut().find(|s| s.n == r.n && s.criterion == r.criterion) {
            Some(s) => s.points.push((r.h, r.power)),
            None => out.push(PowerSeries {
                n: r.n,
                criterion: r.criterion,
                points: vec![(r.h, r.power)],
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn designs_are_valid() {
        let t1 = McDesign::table1(100, Criterion::Mle, TABLE1_H.to_vec(), 10);
        t1.validate().unwrap();
        assert_eq!(t1.truth(0.345), vec![-0.345, -0.345]);
        let t2 = McDesign::table2(100, TABLE2_H.to_vec(), 10);
        t2.validate().unwrap();
        assert_eq!(t2.null_grid.points().unwrap().len(), 81);
        assert_eq!(t2.truth(0.5), vec![-0.5, -0.5, 0.5, 0.5]);
        let bad = McDesign { replications: 0, ..t1 };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_replication_series_are_indicators() {
        let d = McDesign::table1(30, Criterion::Mle, vec![0.0, 0.9], 1);
        let s = power_curve(&d).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].points.iter().all(|&(_, p)| p == 0.0 || p == 1.0));
        let t = mc_table(&d).unwrap();
        assert_eq!(t.row(30, Criterion::Mle, 0.0).unwrap().power, s[0].points[0].1);
    }

    #[test]
    fn replications_are_independent_of_their_count() {
        let d = McDesign::table1(40, Criterion::Mle, vec![0.3], 6);
        let model = d.model.build().unwrap();
        let all = run_replications(&d, model.as_ref(), 40, Criterion::Mle, 0.3).unwrap();
        let few = run_replications(&McDesign { replications: 3, ..d.clone() }, model.as_ref(), 40, Criterion::Mle, 0.3).unwrap();
        assert_eq!(&all[..3], &few[..]);
        assert_eq!(mc_table(&d).unwrap(), mc_table(&d).unwrap());
    }
}
