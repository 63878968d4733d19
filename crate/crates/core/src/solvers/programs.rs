use nalgebra::DMatrix;

use crate::capacity::{add_core_rows, proper_subsets, Capacity, Density, OutcomeSet};
use crate::error::{Error, Result};
use crate::solvers::barrier::{barrier_newton, BarrierOptions, LinearRows, SmoothObjective};
use crate::solvers::lp::{LinearProgram, Relation};
use crate::solvers::SolveReport;

/// Below this plausibility an outcome is treated as impossible.
pub const ZERO_PLAUSIBILITY: f64 = 1e-12;
/// Slack below which a core constraint counts as an equality.
const EQUALITY_TOL: f64 = 1e-12;
const TIGHT_TOL: f64 = 1e-10;

fn indicator(a: OutcomeSet, width: usize, offset: usize) -> Vec<f64> {
    let mut row = vec![0.0; width];
    for y in a.iter() {
        row[offset + y] = 1.0;
    }
    row
}

fn rank(rows: &[Vec<f64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |r, c| rows[r][c]);
    m.rank(1e-9)
}

/// A strictly positive element of the core of `c`.
///
/// First maximizes the smallest coordinate; if that floor is zero some
/// outcome has zero plausibility and the call fails. Otherwise the point is
/// the lexicographic max-min-slack element: the smallest slack over all proper
/// events is maximized, the events that are tight at every maximizer are
/// frozen at that slack, and the remaining slacks are maximized again, until
/// the frozen events pin down a single density. The result is the unique
/// most interior point of the core, so it is symmetric whenever `c` is.
pub fn feasibility_density(c: &Capacity) -> Result<Density> {
    let m = c.cardinality();
    if m == 1 {
        return Density::new(vec![1.0]);
    }

    let mut obj = vec![0.0; m + 1];
    obj[m] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    add_core_rows(&mut lp, c);
    for y in 0..m {
        let mut row = vec![0.0; m + 1];
        row[y] = 1.0;
        row[m] = -1.0;
        lp.constrain(row, Relation::Ge, 0.0);
    }
    let floor = lp.solve()?;
    if floor.x[m] <= ZERO_PLAUSIBILITY {
        let dead: Vec<usize> = (0..m).filter(|&y| c.plausibility(y) <= ZERO_PLAUSIBILITY).collect();
        return Err(Error::Infeasible(format!(
            "no positive core element; outcomes {dead:?} have zero plausibility"
        )));
    }

    let mut free: Vec<OutcomeSet> = proper_subsets(m).collect();
    let mut fixed: Vec<(OutcomeSet, f64)> = Vec::new();
    let mut current;
    loop {
        let build = |target: Option<OutcomeSet>, t_floor: Option<f64>| {
            let width = m + 1;
            let mut obj = vec![0.0; width];
            match target {
                Some(a) => obj[..m].copy_from_slice(&indicator(a, m, 0)),
                None => obj[m] = 1.0,
            }
            let mut lp = LinearProgram::maximize(obj);
            lp.constrain(indicator(OutcomeSet::full(m), width, 0), Relation::Eq, 1.0);
            for &a in &free {
                let mut row = indicator(a, width, 0);
                match t_floor {
                    Some(t) => lp.constrain(row, Relation::Ge, c.value(a) + t),
                    None => {
                        row[m] = -1.0;
                        lp.constrain(row, Relation::Ge, c.value(a))
                    }
                };
            }
            for &(a, v) in &fixed {
                lp.constrain(indicator(a, width, 0), Relation::Ge, c.value(a) + v);
            }
            lp
        };

        let sol = build(None, None).solve()?;
        let t_star = sol.x[m];
        current = sol.x[..m].to_vec();
        let slack = |a: OutcomeSet, p: &[f64]| a.iter().map(|y| p[y]).sum::<f64>() - c.value(a);

        let candidates: Vec<OutcomeSet> = free
            .iter()
            .copied()
            .filter(|&a| slack(a, &current) <= t_star + TIGHT_TOL)
            .collect();
        let mut newly = Vec::new();
        for &a in &candidates {
            let best = build(Some(a), Some(t_star)).solve()?;
            if slack(a, &best.x) <= t_star + 1e-9 {
                newly.push(a);
            }
        }
        if newly.is_empty() {
            newly = candidates;
        }
        if newly.is_empty() {
            break;
        }
        free.retain(|a| !newly.contains(a));
        fixed.extend(newly.into_iter().map(|a| (a, t_star)));

        let mut rows: Vec<Vec<f64>> = fixed.iter().map(|&(a, _)| indicator(a, m, 0)).collect();
        rows.push(vec![1.0; m]);
        if free.is_empty() || rank(&rows) == m {
            break;
        }
    }
    Density::normalized(current)
}

/// The restriction of `c` to the outcomes with positive plausibility:
/// `nu_S(B) = nu(B ∪ S^c)`.
fn support_restriction(c: &Capacity) -> (Vec<usize>, Option<Capacity>) {
    let m = c.cardinality();
    let support: Vec<usize> = (0..m).filter(|&y| c.plausibility(y) > ZERO_PLAUSIBILITY).collect();
    if support.len() == m {
        return (support, None);
    }
    let k = support.len();
    let outside = OutcomeSet::from_indices((0..m).filter(|y| !support.contains(y)));
    let mut values = vec![0.0; 1 << k];
    for (b, v) in values.iter_mut().enumerate() {
        let set = OutcomeSet::from_indices(OutcomeSet(b as u32).iter().map(|i| support[i]));
        *v = c.value(set.union(outside)).clamp(0.0, 1.0);
    }
    values[0] = 0.0;
    values[(1 << k) - 1] = 1.0;
    for b in 1..values.len() {
        // Round-off can break monotonicity by a hair; repair it.
        for i in 0..k {
            if b & (1 << i) != 0 {
                values[b] = values[b].max(values[b ^ (1 << i)]);
            }
        }
    }
    (support, Capacity::new(k, values).ok())
}

/// A core element that is strictly positive on every outcome of positive
/// plausibility and zero elsewhere. Coincides with [`feasibility_density`]
/// when every outcome is plausible.
pub fn relative_interior_point(c: &Capacity) -> Result<Density> {
    let m = c.cardinality();
    let (support, restricted) = support_restriction(c);
    let Some(sub) = restricted else {
        return feasibility_density(c);
    };
    if support.is_empty() {
        return Err(Error::Infeasible("no outcome has positive plausibility".into()));
    }
    let inner = feasibility_density(&sub)?;
    let mut probs = vec![0.0; m];
    for (i, &y) in support.iter().enumerate() {
        probs[y] = inner.prob(i);
    }
    Density::normalized(probs)
}

/// Splits the core constraints of each capacity into equalities and strict
/// inequalities relative to the start point. Block `k` occupies variables
/// `k*m .. (k+1)*m`.
fn core_rows(caps: &[&Capacity], start: &[f64]) -> (LinearRows, LinearRows) {
    let m = caps[0].cardinality();
    let width = m * caps.len();
    let mut ineq = LinearRows::default();
    let mut eq = LinearRows::default();
    for (k, c) in caps.iter().enumerate() {
        let offset = k * m;
        eq.push(indicator(OutcomeSet::full(m), width, offset), 1.0);
        let equalities = c.implicit_equalities(EQUALITY_TOL);
        for a in proper_subsets(m) {
            let row = indicator(a, width, offset);
            let slack: f64 = row.iter().zip(start).map(|(r, x)| r * x).sum::<f64>() - c.value(a);
            if equalities.contains(&a) || slack <= EQUALITY_TOL {
                eq.push(row, c.value(a));
            } else {
                ineq.push(row, c.value(a));
            }
        }
    }
    (ineq, eq)
}

fn check_density(p: &Density, m: usize, what: &str) -> Result<()> {
    if p.len() != m {
        return Err(Error::InvalidArgument(format!(
            "{what} has {} entries but the capacity has {m} outcomes",
            p.len()
        )));
    }
    Ok(())
}

/// `sum_y (q_y + p_y) ln((q_y + p_y) / q_y)`
struct LfpObjective<'a> {
    p: &'a [f64],
}

impl SmoothObjective for LfpObjective<'_> {
    fn dim(&self) -> usize {
        self.p.len()
    }

    fn value(&self, q: &[f64]) -> f64 {
        let mut v = 0.0;
        for (&qy, &py) in q.iter().zip(self.p) {
            if py == 0.0 {
                continue;
            }
            if qy <= 0.0 {
                return f64::INFINITY;
            }
            v += (qy + py) * ((qy + py) / qy).ln();
        }
        v
    }

    fn gradient(&self, q: &[f64], out: &mut [f64]) {
        for ((o, &qy), &py) in out.iter_mut().zip(q).zip(self.p) {
            *o = if py == 0.0 { 0.0 } else { (py / qy).ln_1p() - py / qy };
        }
    }

    fn hessian(&self, q: &[f64], out: &mut DMatrix<f64>) {
        out.fill(0.0);
        for (y, (&qy, &py)) in q.iter().zip(self.p).enumerate() {
            if py != 0.0 {
                out[(y, y)] = py * py / (qy * qy * (qy + py));
            }
        }
    }
}

/// `sum_y p_y ln(p_y / q_y)`, with `0 ln 0 = 0`.
struct KlObjective<'a> {
    p: &'a [f64],
}

impl SmoothObjective for KlObjective<'_> {
    fn dim(&self) -> usize {
        self.p.len()
    }

    fn value(&self, q: &[f64]) -> f64 {
        let mut v = 0.0;
        for (&qy, &py) in q.iter().zip(self.p) {
            if py == 0.0 {
                continue;
            }
            if qy <= 0.0 {
                return f64::INFINITY;
            }
            v += py * (py / qy).ln();
        }
        v
    }

    fn gradient(&self, q: &[f64], out: &mut [f64]) {
        for ((o, &qy), &py) in out.iter_mut().zip(q).zip(self.p) {
            *o = if py == 0.0 { 0.0 } else { -py / qy };
        }
    }

    fn hessian(&self, q: &[f64], out: &mut DMatrix<f64>) {
        out.fill(0.0);
        for (y, (&qy, &py)) in q.iter().zip(self.p).enumerate() {
            if py != 0.0 {
                out[(y, y)] = py / (qy * qy);
            }
        }
    }
}

/// `sum_y (a_y + b_y) ln((a_y + b_y) / a_y)` over `x = (a, b)`.
struct PairObjective {
    m: usize,
}

impl SmoothObjective for PairObjective {
    fn dim(&self) -> usize {
        2 * self.m
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (a, b) = x.split_at(self.m);
        let mut v = 0.0;
        for (&ay, &by) in a.iter().zip(b) {
            if by <= 0.0 && ay <= 0.0 {
                continue;
            }
            if ay <= 0.0 || by < 0.0 {
                return f64::INFINITY;
            }
            v += (ay + by) * ((ay + by) / ay).ln();
        }
        v
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let m = self.m;
        for y in 0..m {
            let (a, b) = (x[y], x[m + y]);
            if a <= 0.0 && b <= 0.0 {
                out[y] = 0.0;
                out[m + y] = 0.0;
                continue;
            }
            let r = (b / a).ln_1p();
            out[y] = r - b / a;
            out[m + y] = r + 1.0;
        }
    }

    fn hessian(&self, x: &[f64], out: &mut DMatrix<f64>) {
        let m = self.m;
        out.fill(0.0);
        for y in 0..m {
            let (a, b) = (x[y], x[m + y]);
            if a <= 0.0 && b <= 0.0 {
                continue;
            }
            let s = a + b;
            out[(y, y)] = b * b / (a * a * s);
            out[(y, m + y)] = -b / (a * s);
            out[(m + y, y)] = -b / (a * s);
            out[(m + y, m + y)] = 1.0 / s;
        }
    }
}

fn run<F: SmoothObjective>(f: &F, caps: &[&Capacity], start: Vec<f64>) -> Result<(Vec<f64>, SolveReport)> {
    if !f.value(&start).is_finite() {
        return Err(Error::Infeasible(
            "objective is infinite on the whole core: an outcome with positive weight has zero plausibility".into(),
        ));
    }
    let (ineq, eq) = core_rows(caps, &start);
    let out = barrier_newton(f, &ineq, &eq, &start, &BarrierOptions::default())?;
    Ok((out.x, out.report))
}

fn finish(x: &[f64], c: &Capacity) -> Result<Density> {
    let m = c.cardinality();
    let probs = (0..m)
        .map(|y| if c.plausibility(y) <= ZERO_PLAUSIBILITY { 0.0 } else { x[y].max(0.0) })
        .collect();
    Density::normalized(probs)
}

/// Least-favorable density in the core of `c_theta` against the alternative
/// density `p`: the minimizer of `sum_y (q_y + p_y) ln((q_y + p_y) / q_y)`.
pub fn lfp_density(c_theta: &Capacity, p: &Density) -> Result<(Density, SolveReport)> {
    let m = c_theta.cardinality();
    check_density(p, m, "alternative density")?;
    let start = relative_interior_point(c_theta)?;
    let f = LfpObjective { p: p.probs() };
    let (x, report) = run(&f, &[c_theta], start.probs().to_vec())?;
    Ok((finish(&x, c_theta)?, report))
}

/// Kullback-Leibler projection of `p_hat` onto the core of `c_theta`:
/// the minimizer of `sum_y p_hat_y ln(p_hat_y / q_y)`.
pub fn kl_projection(p_hat: &Density, c_theta: &Capacity) -> Result<(Density, SolveReport)> {
    let m = c_theta.cardinality();
    check_density(p_hat, m, "frequency vector")?;
    let start = relative_interior_point(c_theta)?;
    let f = KlObjective { p: p_hat.probs() };
    let (x, report) = run(&f, &[c_theta], start.probs().to_vec())?;
    Ok((finish(&x, c_theta)?, report))
}

/// Jointly least-favorable pair `(q0, q1)` with `q0` in the core of `c0` and
/// `q1` in the core of `c1`, minimizing `sum_y (q0_y + q1_y) ln((q0_y + q1_y) / q0_y)`.
pub fn lfp_pair(c0: &Capacity, c1: &Capacity) -> Result<(Density, Density, SolveReport)> {
    let m = c0.cardinality();
    if c1.cardinality() != m {
        return Err(Error::InvalidArgument("capacities live on different spaces".into()));
    }
    let s0 = relative_interior_point(c0)?;
    let s1 = relative_interior_point(c1)?;
    let mut start = s0.probs().to_vec();
    start.extend_from_slice(s1.probs());
    let f = PairObjective { m };
    let (x, report) = run(&f, &[c0, c1], start)?;
    Ok((finish(&x[..m], c0)?, finish(&x[m..], c1)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{containment_from_random_set, core_membership, RandomSetDistribution};
    use crate::solvers::{SolveStatus, KKT_TOL};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn two_point(a: f64, b: f64) -> Capacity {
        Capacity::new(2, vec![0.0, a, b, 1.0]).unwrap()
    }

    /// Game-shaped capacity on {00, 01, 10, 11} from the five focal masses.
    fn game_capacity(m00: f64, m01: f64, m10: f64, m11: f64, mult: f64) -> Capacity {
        let d = RandomSetDistribution::new(
            4,
            [
                (OutcomeSet::singleton(0), m00),
                (OutcomeSet::singleton(1), m01),
                (OutcomeSet::singleton(2), m10),
                (OutcomeSet::singleton(3), m11),
                (OutcomeSet::from_indices([1, 2]), mult),
            ],
        )
        .unwrap();
        containment_from_random_set(&d)
    }

    fn grid_min(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let n = 200_000;
        let mut best = (f64::INFINITY, lo);
        for i in 0..=n {
            let z = lo + (hi - lo) * i as f64 / n as f64;
            let v = f(z);
            if v < best.0 {
                best = (v, z);
            }
        }
        best.1
    }

    #[test]
    fn feasibility_splits_slack_equally() {
        let p = feasibility_density(&two_point(0.3, 0.4)).unwrap();
        assert_abs_diff_eq!(p.prob(0), 0.45, epsilon = 1e-12);
        assert_abs_diff_eq!(p.prob(1), 0.55, epsilon = 1e-12);
    }

    #[test]
    fn feasibility_additive_and_vacuous() {
        let q = Density::uniform(4);
        let p = feasibility_density(&Capacity::additive(&q)).unwrap();
        assert!(p.max_abs_diff(&q) < 1e-12);
        let p = feasibility_density(&Capacity::vacuous(3)).unwrap();
        assert!(p.max_abs_diff(&Density::uniform(3)) < 1e-12);
    }

    #[test]
    fn feasibility_game_uses_multiplicity_midpoint() {
        let c = game_capacity(0.25, 0.30417, 0.30417, 0.02518, 0.11648);
        let p = feasibility_density(&c).unwrap();
        assert_abs_diff_eq!(p.prob(0), 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(p.prob(2), 0.30417 + 0.11648 / 2.0, epsilon = 1e-9);
        assert!(core_membership(&p, &c));
    }

    #[test]
    fn feasibility_rejects_zero_plausibility() {
        let c = two_point(1.0, 0.0);
        assert!(matches!(feasibility_density(&c), Err(Error::Infeasible(_))));
        let p = relative_interior_point(&c).unwrap();
        assert_eq!(p.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn relative_interior_on_partial_support() {
        let d = RandomSetDistribution::new(3, [(OutcomeSet::from_indices([0, 1]), 1.0)]).unwrap();
        let c = containment_from_random_set(&d);
        let p = relative_interior_point(&c).unwrap();
        assert_abs_diff_eq!(p.prob(0), 0.5, epsilon = 1e-12);
        assert_eq!(p.prob(2), 0.0);
    }

    #[test]
    fn lfp_interior_returns_alternative() {
        let c = two_point(0.2, 0.3);
        let p = Density::new(vec![0.4, 0.6]).unwrap();
        let (q, rep) = lfp_density(&c, &p).unwrap();
        assert!(q.max_abs_diff(&p) < 1e-8);
        assert_eq!(rep.status, SolveStatus::Converged);
    }

    #[test]
    fn lfp_active_constraint_matches_grid() {
        let c = two_point(0.6, 0.0);
        let p = Density::new(vec![0.5, 0.5]).unwrap();
        let (q, rep) = lfp_density(&c, &p).unwrap();
        let f = |a: f64| (a + 0.5) * ((a + 0.5) / a).ln() + (1.5 - a) * ((1.5 - a) / (1.0 - a)).ln();
        let oracle = grid_min(0.6, 0.999, f);
        assert_abs_diff_eq!(q.prob(0), oracle, epsilon = 1e-5);
        assert_abs_diff_eq!(q.prob(0), 0.6, epsilon = 1e-9);
        assert!(rep.kkt_residual <= KKT_TOL);
    }

    #[test]
    fn lfp_game_matches_one_dimensional_oracle() {
        let (m10, mult) = (0.30417, 0.11648);
        let c = game_capacity(0.25, 0.30417, m10, 0.02518, mult);
        let p = Density::new(vec![0.1, 0.1, 0.7, 0.1]).unwrap();
        let (q, _) = lfp_density(&c, &p).unwrap();
        let eta1 = 0.30417 * 2.0 + mult;
        let f = |z: f64| (z + 0.7) * ((z + 0.7) / z).ln() + (eta1 - z + 0.1) * ((eta1 - z + 0.1) / (eta1 - z)).ln();
        let oracle = grid_min(m10, m10 + mult, f);
        assert_abs_diff_eq!(q.prob(2), oracle, epsilon = 1e-5);
        assert_abs_diff_eq!(q.prob(0), 0.25, epsilon = 1e-9);
    }

    #[test]
    fn kl_projection_cases() {
        let c = two_point(0.6, 0.0);
        let (q, _) = kl_projection(&Density::new(vec![0.5, 0.5]).unwrap(), &c).unwrap();
        assert_abs_diff_eq!(q.prob(0), 0.6, epsilon = 1e-9);
        let inside = Density::new(vec![0.7, 0.3]).unwrap();
        let (q, rep) = kl_projection(&inside, &c).unwrap();
        assert!(q.max_abs_diff(&inside) < 1e-8);
        assert!(rep.objective.abs() < 1e-10);
    }

    #[test]
    fn kl_projection_with_zero_frequency() {
        let c = Capacity::vacuous(3);
        let p_hat = Density::new(vec![0.5, 0.5, 0.0]).unwrap();
        let (q, _) = kl_projection(&p_hat, &c).unwrap();
        assert!(q.max_abs_diff(&p_hat) < 1e-7);
    }

    #[test]
    fn pair_with_additive_alternative() {
        let c0 = two_point(0.6, 0.0);
        let p = Density::new(vec![0.5, 0.5]).unwrap();
        let (q0, q1, _) = lfp_pair(&c0, &Capacity::additive(&p)).unwrap();
        let (q, _) = lfp_density(&c0, &p).unwrap();
        assert!(q0.max_abs_diff(&q) < 1e-8);
        assert!(q1.max_abs_diff(&p) < 1e-12);
    }

    #[test]
    fn pair_with_equal_capacities() {
        let c = two_point(0.2, 0.3);
        let (q0, q1, rep) = lfp_pair(&c, &c).unwrap();
        assert!(q0.max_abs_diff(&q1) < 1e-6);
        assert_abs_diff_eq!(rep.objective, 2.0 * 2f64.ln(), epsilon = 1e-8);
    }

    #[test]
    fn pair_with_disjoint_cores_matches_grid() {
        let c0 = two_point(0.6, 0.0);
        let c1 = two_point(0.0, 0.6);
        let (q0, q1, _) = lfp_pair(&c0, &c1).unwrap();
        let f = |a: f64, b: f64| (a + b) * ((a + b) / a).ln() + (2.0 - a - b) * ((2.0 - a - b) / (1.0 - a)).ln();
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let n = 400;
        for i in 0..=n {
            let a = 0.6 + 0.399 * i as f64 / n as f64;
            for j in 0..=n {
                let b = 0.4 * j as f64 / n as f64;
                let v = f(a, b);
                if v < best.0 {
                    best = (v, a, b);
                }
            }
        }
        assert_abs_diff_eq!(q0.prob(0), best.1, epsilon = 2e-3);
        assert_abs_diff_eq!(q1.prob(0), best.2, epsilon = 2e-3);
        assert_abs_diff_eq!(q0.prob(0), 0.6, epsilon = 1e-8);
        assert_abs_diff_eq!(q1.prob(0), 0.4, epsilon = 1e-8);
    }

    #[test]
    fn lfp_is_deterministic() {
        let c = game_capacity(0.2, 0.25, 0.2, 0.1, 0.25);
        let p = Density::new(vec![0.3, 0.2, 0.4, 0.1]).unwrap();
        let a = lfp_density(&c, &p).unwrap();
        let b = lfp_density(&c, &p).unwrap();
        assert_eq!(a.0.probs(), b.0.probs());
        assert_eq!(a.1, b.1);
    }

    fn random_capacity(m: usize) -> impl Strategy<Value = Capacity> {
        let n = (1usize << m) - 1;
        prop::collection::vec(0.0..1.0f64, n).prop_map(move |w| {
            let raw: Vec<f64> = w.iter().map(|v| v * v * v + 1e-3).collect();
            let total: f64 = raw.iter().sum();
            let atoms = raw.iter().enumerate().map(|(i, &v)| (OutcomeSet(i as u32 + 1), v / total));
            containment_from_random_set(&RandomSetDistribution::new(m, atoms).unwrap())
        })
    }

    fn random_density(m: usize) -> impl Strategy<Value = Density> {
        prop::collection::vec(0.05..1.0f64, m).prop_map(|v| Density::normalized(v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn outputs_lie_in_the_core(c in random_capacity(3), p in random_density(3)) {
            let (q, rep) = lfp_density(&c, &p).unwrap();
            prop_assert!(core_membership(&q, &c));
            prop_assert!(rep.kkt_residual <= KKT_TOL);
            let (q, _) = kl_projection(&p, &c).unwrap();
            prop_assert!(core_membership(&q, &c));
            let f = feasibility_density(&c).unwrap();
            prop_assert!(core_membership(&f, &c));
            prop_assert!(f.probs().iter().all(|&v| v > 0.0));
        }

        #[test]
        fn interior_alternative_is_its_own_lfp(c in random_capacity(3), p in random_density(3)) {
            if core_membership(&p, &c) {
                let (q, _) = lfp_density(&c, &p).unwrap();
                prop_assert!(q.max_abs_diff(&p) <= 1e-7);
            }
            let f = feasibility_density(&c).unwrap();
            let (q, _) = lfp_density(&c, &f).unwrap();
            prop_assert!(q.max_abs_diff(&f) <= 1e-7);
        }

        #[test]
        fn pair_reduces_to_lfp_for_additive_alternative(c in random_capacity(3), p in random_density(3)) {
            let (q0, _, _) = lfp_pair(&c, &Capacity::additive(&p)).unwrap();
            let (q, _) = lfp_density(&c, &p).unwrap();
            prop_assert!(q0.max_abs_diff(&q) <= 1e-8);
        }
    }
}
