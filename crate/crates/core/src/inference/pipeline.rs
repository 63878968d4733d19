//! Split and cross-fit likelihood-ratio tests.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::inference::criteria::{entrants_value, moment_value, neg_loglik_value, summarize, Criterion};
use crate::inference::likelihood::{restricted_mle, SolverRoute, TailoredLikelihood};
use crate::inference::optimize::{multistart_minimize, Optimum, SearchBox};
use crate::inference::{Dataset, SplitPlan};
use crate::models::ChoiceModel;

/// Default master seed for optimizer starts and splits.
pub const DEFAULT_SEED: u64 = 20240101;

/// A log-scale statistic that may be infinite. Serializes finite values as
/// numbers and infinities as `"+inf"` or `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogStat(pub f64);

impl LogStat {
    pub fn value(self) -> f64 {
        self.0
    }

    /// `exp` of the log value, saturating to `+inf`.
    pub fn exp(self) -> f64 {
        self.0.exp()
    }
}

impl Serialize for LogStat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("+inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for LogStat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = LogStat;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, \"+inf\" or \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<LogStat, E> {
                Ok(LogStat(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<LogStat, E> {
                Ok(LogStat(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<LogStat, E> {
                Ok(LogStat(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<LogStat, E> {
                match v {
                    "+inf" => Ok(LogStat(f64::INFINITY)),
                    "-inf" => Ok(LogStat(f64::NEG_INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Reject,
    FailToReject,
}

/// The null hypothesis as a finite grid, plus the search box of the
/// unrestricted estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSpec {
    pub theta0_grid: Vec<Vec<f64>>,
    pub search_box: SearchBox,
}

impl HypothesisSpec {
    pub fn new(theta0_grid: Vec<Vec<f64>>, search_box: SearchBox) -> Result<Self> {
        if theta0_grid.is_empty() {
            return Err(Error::InvalidArgument("empty null grid".into()));
        }
        if theta0_grid.iter().any(|t| t.len() != search_box.dim()) {
            return Err(Error::InvalidArgument("null grid points and search box differ in dimension".into()));
        }
        Ok(Self { theta0_grid, search_box })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestConfig {
    pub alpha: f64,
    pub criterion: Criterion,
    pub route: SolverRoute,
    pub optimizer_seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            criterion: Criterion::Mle,
            route: SolverRoute::Auto,
            optimizer_seed: DEFAULT_SEED,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Grid over the box `[lower, upper]` with spacing `step` per coordinate;
/// a zero-width coordinate contributes one value. Points are ordered with
/// the last coordinate varying fastest.
pub fn lattice(lower: &[f64], upper: &[f64], step: &[f64]) -> Result<Vec<Vec<f64>>> {
    if lower.len() != upper.len() || lower.len() != step.len() {
        return Err(Error::InvalidArgument("lattice bounds and steps differ in length".into()));
    }
    let mut axes = Vec::with_capacity(lower.len());
    for j in 0..lower.len() {
        let (l, u, h) = (lower[j], upper[j], step[j]);
        if !(l <= u) || !l.is_finite() || !u.is_finite() {
            return Err(Error::InvalidArgument(format!("lattice coordinate {j}: need finite lower <= upper")));
        }
        if u == l {
            axes.push(vec![l]);
            continue;
        }
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(format!("lattice coordinate {j}: step must be positive")));
        }
        let count = ((u - l) / h + 1e-9).floor() as usize + 1;
        axes.push((0..count).map(|i| if i + 1 == count && (l + i as f64 * h - u).abs() < 1e-9 { u } else { l + i as f64 * h }).collect());
    }
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

/// A parameter grid given by its points or as a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    Points { points: Vec<Vec<f64>> },
    Lattice { lower: Vec<f64>, upper: Vec<f64>, step: Vec<f64> },
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<Vec<f64>>> {
        let pts = match self {
            GridSpec::Points { points } => points.clone(),
            GridSpec::Lattice { lower, upper, step } => lattice(lower, upper, step)?,
        };
        if pts.is_empty() {
            return Err(Error::InvalidArgument("empty grid".into()));
        }
        Ok(pts)
    }
}

/// The unrestricted estimate on `data` by minimizing the chosen criterion
/// (for [`Criterion::Entrants`], the negative log-likelihood of the number
/// of entrants) over the box.
pub fn unrestricted_estimate(
    data: &Dataset,
    criterion: Criterion,
    model: &dyn ChoiceModel,
    search_box: &SearchBox,
    seed: u64,
    route: SolverRoute,
) -> Result<Optimum> {
    let cells = summarize(data);
    if criterion == Criterion::Entrants {
        entrants_value(&search_box.lower, &cells, model)?;
    }
    let f = |theta: &[f64]| match criterion {
        Criterion::Moment => moment_value(theta, &cells, model),
        Criterion::Mle => neg_loglik_value(theta, &cells, model, route),
        Criterion::Entrants => entrants_value(theta, &cells, model).unwrap_or(f64::INFINITY),
    };
    Ok(multistart_minimize(&f, search_box, seed))
}

/// Log-densities of one likelihood-half observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Index in the full sample.
    pub index: usize,
    pub y: usize,
    /// `ln p(Y_i | X_i)` under the alternative density.
    pub ln_p: LogStat,
    /// `ln q(Y_i | X_i)` under the least-favorable density at the restricted estimate.
    pub ln_q0: LogStat,
}

/// One direction of the cross-fit: estimate on `d1`, likelihood on `d0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionRecord {
    pub theta_hat1: Vec<f64>,
    pub theta_hat1_non_identified: bool,
    pub theta_hat0: Vec<f64>,
    pub theta_hat0_index: usize,
    pub loglik_alternative: LogStat,
    pub loglik_restricted: LogStat,
    pub log_t: LogStat,
    pub trace: Vec<TraceEntry>,
}

/// `ln T = l(theta_hat1) - l(theta_hat0)`, `+inf` when the restricted
/// likelihood is zero.
pub fn log_ratio(alternative: f64, restricted: f64) -> f64 {
    if restricted == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        alternative - restricted
    }
}

/// `ln((exp(a) + exp(b)) / 2)` without overflow.
pub fn log_mean_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi.is_infinite() {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln() - std::f64::consts::LN_2
}

/// `Reject` iff `S > 1 / alpha`.
pub fn decide(log_s: f64, alpha: f64) -> Decision {
    if log_s > -alpha.ln() {
        Decision::Reject
    } else {
        Decision::FailToReject
    }
}

/// The estimation-dependent part of one direction, reusable across null grids.
pub struct PreparedDirection {
    pub d0: Vec<usize>,
    pub data_d0: Dataset,
    pub estimate: Optimum,
    pub likelihood: TailoredLikelihood,
}

impl PreparedDirection {
    pub fn new(
        data: &Dataset,
        d0: &[usize],
        d1: &[usize],
        model: &dyn ChoiceModel,
        search_box: &SearchBox,
        config: &TestConfig,
    ) -> Result<Self> {
        let data_d0 = data.subset(d0)?;
        let data_d1 = data.subset(d1)?;
        let estimate = unrestricted_estimate(&data_d1, config.criterion, model, search_box, config.optimizer_seed, config.route)?;
        let likelihood = TailoredLikelihood::new(&data_d0, &estimate.theta, model, config.route)?;
        Ok(Self {
            d0: d0.to_vec(),
            data_d0,
            estimate,
            likelihood,
        })
    }

    /// Completes the direction against the null grid.
    pub fn record(&self, grid: &[Vec<f64>], model: &dyn ChoiceModel) -> Result<DirectionRecord> {
        let fit = restricted_mle(grid, &self.likelihood, model)?;
        let alternative = self.likelihood.alternative_loglik();
        let trace = self
            .likelihood
            .observation_logs(&self.data_d0, &fit.theta, model)
            .into_iter()
            .zip(self.d0.iter().zip(self.data_d0.observations()))
            .map(|((ln_p, ln_q0), (&index, o))| TraceEntry {
                index,
                y: o.y,
                ln_p: LogStat(ln_p),
                ln_q0: LogStat(ln_q0),
            })
            .collect();
        Ok(DirectionRecord {
            theta_hat1: self.estimate.theta.clone(),
            theta_hat1_non_identified: self.estimate.non_identified,
            theta_hat0: fit.theta,
            theta_hat0_index: fit.index,
            loglik_alternative: LogStat(alternative),
            loglik_restricted: LogStat(fit.loglik),
            log_t: LogStat(log_ratio(alternative, fit.loglik)),
            trace,
        })
    }
}

/// Split likelihood-ratio statistic: estimate on `plan.d1`, likelihood on `plan.d0`.
pub fn split_lr(
    data: &Dataset,
    plan: &SplitPlan,
    hyp: &HypothesisSpec,
    model: &dyn ChoiceModel,
    config: &TestConfig,
) -> Result<DirectionRecord> {
    config.validate()?;
    PreparedDirection::new(data, &plan.d0, &plan.d1, model, &hyp.search_box, config)?.record(&hyp.theta0_grid, model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub split: SplitPlan,
    pub forward: DirectionRecord,
    pub swapped: DirectionRecord,
    pub log_t_n: LogStat,
    pub log_t_n_swap: LogStat,
    /// `ln((T_n + T_n_swap) / 2)`.
    pub log_s_n: LogStat,
    pub alpha: f64,
    pub decision: Decision,
}

impl TestRecord {
    pub fn t_n(&self) -> f64 {
        self.log_t_n.exp()
    }

    pub fn t_n_swap(&self) -> f64 {
        self.log_t_n_swap.exp()
    }

    pub fn s_n(&self) -> f64 {
        self.log_s_n.exp()
    }
}

/// Assembles a cross-fit record from the two directions.
pub fn combine(split: SplitPlan, forward: DirectionRecord, swapped: DirectionRecord, alpha: f64) -> TestRecord {
    let log_s = log_mean_exp(forward.log_t.0, swapped.log_t.0);
    TestRecord {
        split,
        log_t_n: forward.log_t,
        log_t_n_swap: swapped.log_t,
        log_s_n: LogStat(log_s),
        alpha,
        decision: decide(log_s, alpha),
        forward,
        swapped,
    }
}

/// Cross-fit test: the split statistic in both directions, averaged, and
/// compared with `1 / alpha`.
pub fn crossfit_lr(
    data: &Dataset,
    plan: &SplitPlan,
    hyp: &HypothesisSpec,
    model: &dyn ChoiceModel,
    config: &TestConfig,
) -> Result<TestRecord> {
    let forward = split_lr(data, plan, hyp, model, config)?;
    let swapped = split_lr(data, &plan.swapped(), hyp, model, config)?;
    Ok(combine(plan.clone(), forward, swapped, config.alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{split_sample, CovariateKind, Observation};
    use crate::models::EntryGame;

    fn game_data(ys: &[usize]) -> Dataset {
        Dataset::new(4, ys.iter().map(|&y| Observation { y, x: vec![] }).collect(), CovariateKind::Discrete).unwrap()
    }

    fn sample() -> Dataset {
        game_data(&[0, 1, 2, 3, 2, 1, 0, 0, 3, 2, 1, 2, 0, 3, 1, 2, 2, 0, 1, 3])
    }

    fn hyp(grid: Vec<Vec<f64>>) -> HypothesisSpec {
        HypothesisSpec::new(grid, SearchBox::new(vec![-3.0, -3.0], vec![0.0, 0.0]).unwrap()).unwrap()
    }

    #[test]
    fn log_stat_serialization() {
        let v = serde_json::to_string(&[LogStat(1.5), LogStat(f64::INFINITY), LogStat(f64::NEG_INFINITY)]).unwrap();
        assert_eq!(v, r#"[1.5,"+inf","-inf"]"#);
        let back: Vec<LogStat> = serde_json::from_str(&v).unwrap();
        assert_eq!(back[1].0, f64::INFINITY);
        assert_eq!(back[0].0, 1.5);
        assert!(serde_json::from_str::<LogStat>("\"inf\"").is_err());
    }

    #[test]
    fn log_mean_exp_cases() {
        assert!((log_mean_exp(0.0, 0.0)).abs() < 1e-15);
        assert!((log_mean_exp(800.0, 800.0) - 800.0).abs() < 1e-12);
        assert_eq!(log_mean_exp(f64::INFINITY, 0.0), f64::INFINITY);
        assert_eq!(log_mean_exp(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert!((log_mean_exp(f64::NEG_INFINITY, 2.0) - (2.0 - std::f64::consts::LN_2)).abs() < 1e-15);
    }

    #[test]
    fn decision_threshold() {
        assert_eq!(decide(20f64.ln() + 1e-12, 0.05), Decision::Reject);
        assert_eq!(decide(19f64.ln(), 0.05), Decision::FailToReject);
        assert_eq!(decide(f64::INFINITY, 0.05), Decision::Reject);
        assert_eq!(log_ratio(-3.0, f64::NEG_INFINITY), f64::INFINITY);
    }

    #[test]
    fn grid_specs() {
        let l = GridSpec::Lattice { lower: vec![-1.0], upper: vec![1.0], step: vec![0.5] };
        assert_eq!(l.points().unwrap().len(), 5);
        assert!(GridSpec::Points { points: vec![] }.points().is_err());
    }

    #[test]
    fn lattice_points() {
        let g = lattice(&[-2.0, 0.0], &[0.0, 0.0], &[0.25, 0.25]).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[8], vec![0.0, 0.0]);
        assert_eq!(lattice(&[-1.0], &[1.0], &[0.1]).unwrap().len(), 21);
        assert!(lattice(&[1.0], &[0.0], &[0.1]).is_err());
    }

    #[test]
    fn estimate_in_null_grid_never_rejects() {
        let d = sample();
        let plan = split_sample(&d, 5).unwrap();
        let config = TestConfig::default();
        let prepared = PreparedDirection::new(&d, &plan.d0, &plan.d1, &EntryGame::without_covariates(), &hyp(vec![vec![0.0, 0.0]]).search_box, &config).unwrap();
        let theta1 = prepared.estimate.theta.clone();
        let rec = prepared.record(&[vec![0.0, 0.0], theta1], &EntryGame::without_covariates()).unwrap();
        assert!(rec.log_t.0 <= 1e-10);
    }

    #[test]
    fn swapping_halves_swaps_statistics() {
        let d = sample();
        let g = EntryGame::without_covariates();
        let plan = split_sample(&d, 11).unwrap();
        let h = hyp(vec![vec![0.0, 0.0]]);
        let config = TestConfig::default();
        let a = crossfit_lr(&d, &plan, &h, &g, &config).unwrap();
        let b = crossfit_lr(&d, &plan.swapped(), &h, &g, &config).unwrap();
        assert_eq!(a.log_t_n, b.log_t_n_swap);
        assert_eq!(a.log_t_n_swap, b.log_t_n);
        assert_eq!(a.log_s_n, b.log_s_n);
        assert_eq!(a.forward.trace.len(), plan.d0.len());
    }

    #[test]
    fn identical_halves_give_identical_statistics() {
        let half = [0, 1, 2, 3, 2, 1, 0];
        let ys: Vec<usize> = half.iter().chain(half.iter()).copied().collect();
        let d = game_data(&ys);
        let plan = SplitPlan {
            d0: (0..7).collect(),
            d1: (7..14).collect(),
            seed: 0,
        };
        let rec = crossfit_lr(&d, &plan, &hyp(vec![vec![-0.5, -0.5]]), &EntryGame::without_covariates(), &TestConfig::default()).unwrap();
        assert_eq!(rec.log_t_n, rec.log_t_n_swap);
        assert_eq!(rec.log_s_n, rec.log_t_n);
    }

    #[test]
    fn forcing_a_worse_null_point_increases_the_statistic() {
        let d = sample();
        let g = EntryGame::without_covariates();
        let plan = split_sample(&d, 2).unwrap();
        let config = TestConfig::default();
        let grid = lattice(&[-2.0, -2.0], &[0.0, 0.0], &[0.5, 0.5]).unwrap();
        let prepared = PreparedDirection::new(&d, &plan.d0, &plan.d1, &g, &hyp(grid.clone()).search_box, &config).unwrap();
        let best = prepared.record(&grid, &g).unwrap();
        for t in &grid {
            let forced = prepared.record(std::slice::from_ref(t), &g).unwrap();
            assert!(forced.log_t.0 >= best.log_t.0);
        }
    }

    #[test]
    fn entrants_criterion_requires_a_statistic_free_model() {
        let d = sample();
        let b = SearchBox::new(vec![-1.0, -1.0], vec![0.0, 0.0]).unwrap();
        let g = EntryGame::without_covariates();
        let e = unrestricted_estimate(&d, Criterion::Entrants, &g, &b, 1, SolverRoute::Auto).unwrap();
        assert!(b.contains(&e.theta));
    }

    #[test]
    fn invalid_alpha() {
        let c = TestConfig { alpha: 1.5, ..TestConfig::default() };
        assert!(c.validate().is_err());
    }
}
