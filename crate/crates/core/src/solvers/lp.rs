//! Dense two-phase primal simplex.
//!
//! The programs solved here are tiny (a few dozen rows, at most a few hundred
//! columns), so the tableau is stored densely and Bland's rule is used for both
//! the entering and the leaving variable. Bland's rule cannot cycle and makes
//! every solve a pure function of its input.

use crate::error::{Error, Result};
use crate::solvers::{SolveReport, SolveStatus};

const PIVOT_TOL: f64 = 1e-12;
const COST_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

/// `maximize c'x` subject to linear rows and `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub report: SolveReport,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        Self {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::maximize(objective.into_iter().map(|c| -c).collect())
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.objective.len(), "row width mismatch");
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    /// Solves the program. The reported objective is always in the
    /// maximization sense used to build the program.
    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self).run(self)
    }

    fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().fold(0.0_f64, |w, &v| w.max(-v));
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let v = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }
}

struct Tableau {
    n_orig: usize,
    n_cols: usize,
    first_art: usize,
    a: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    obj: Vec<f64>,
    obj_val: f64,
    pivots: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n_orig = lp.objective.len();
        // Normalize to nonnegative right-hand sides.
        let rows: Vec<Row> = lp
            .rows
            .iter()
            .map(|r| {
                if r.rhs < 0.0 {
                    Row {
                        coeffs: r.coeffs.iter().map(|c| -c).collect(),
                        relation: match r.relation {
                            Relation::Le => Relation::Ge,
                            Relation::Ge => Relation::Le,
                            Relation::Eq => Relation::Eq,
                        },
                        rhs: -r.rhs,
                    }
                } else {
                    r.clone()
                }
            })
            .collect();

        let n_slack = rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.relation != Relation::Le).count();
        let first_art = n_orig + n_slack;
        let n_cols = first_art + n_art;

        let mut a = Vec::with_capacity(rows.len());
        let mut rhs = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut slack, mut art) = (n_orig, first_art);
        for r in &rows {
            let mut line = vec![0.0; n_cols];
            line[..n_orig].copy_from_slice(&r.coeffs);
            match r.relation {
                Relation::Le => {
                    line[slack] = 1.0;
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    line[slack] = -1.0;
                    slack += 1;
                    line[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    line[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
            a.push(line);
            rhs.push(r.rhs);
        }

        Self {
            n_orig,
            n_cols,
            first_art,
            a,
            rhs,
            basis,
            obj: vec![0.0; n_cols],
            obj_val: 0.0,
            pivots: 0,
        }
    }

    /// Loads `maximize cost'x` into the reduced-cost row.
    fn load_objective(&mut self, cost: &[f64]) {
        self.obj = cost.iter().map(|c| -c).collect();
        self.obj.resize(self.n_cols, 0.0);
        self.obj_val = 0.0;
        for i in 0..self.a.len() {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for j in 0..self.n_cols {
                    self.obj[j] += cb * self.a[i][j];
                }
                self.obj_val += cb * self.rhs[i];
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col];
        for v in self.a[row].iter_mut() {
            *v /= p;
        }
        self.rhs[row] /= p;
        let pivot_row = self.a[row].clone();
        let pivot_rhs = self.rhs[row];
        for i in 0..self.a.len() {
            if i == row {
                continue;
            }
            let f = self.a[i][col];
            if f != 0.0 {
                for (v, pv) in self.a[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.rhs[i] -= f * pivot_rhs;
                if self.rhs[i] < 0.0 && self.rhs[i] > -FEAS_TOL {
                    self.rhs[i] = 0.0;
                }
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.obj_val -= f * pivot_rhs;
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Runs simplex iterations over columns `< col_limit` until optimal.
    fn iterate(&mut self, col_limit: usize) -> Result<()> {
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Err(Error::MaxIter {
                    iterations: self.pivots,
                });
            }
            let Some(col) = (0..col_limit).find(|&j| self.obj[j] < -COST_TOL) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.a.len() {
                let aij = self.a[i][col];
                if aij > PIVOT_TOL {
                    let ratio = self.rhs[i] / aij;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-14
                                || ((ratio - best).abs() <= 1e-14 && self.basis[i] < self.basis[r])
                            {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return Err(Error::Unbounded),
            }
        }
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution> {
        // Phase 1: maximize minus the sum of artificials.
        if self.first_art < self.n_cols {
            let mut cost = vec![0.0; self.n_cols];
            for c in cost.iter_mut().skip(self.first_art) {
                *c = -1.0;
            }
            self.load_objective(&cost);
            self.iterate(self.n_cols)?;
            if self.obj_val < -FEAS_TOL {
                return Err(Error::Infeasible(format!(
                    "linear program has no feasible point (phase-1 residual {:.3e})",
                    -self.obj_val
                )));
            }
            // Drive remaining artificials out of the basis; drop redundant rows.
            let mut i = 0;
            while i < self.a.len() {
                if self.basis[i] >= self.first_art {
                    let col = (0..self.first_art).find(|&j| self.a[i][j].abs() > 1e-9);
                    match col {
                        Some(j) => self.pivot(i, j),
                        None => {
                            self.a.remove(i);
                            self.rhs.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }

        // Phase 2 over original and slack columns only.
        let mut cost = lp.objective.clone();
        cost.resize(self.n_cols, 0.0);
        self.load_objective(&cost);
        self.iterate(self.first_art)?;

        let mut x = vec![0.0; self.n_orig];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_orig {
                x[b] = self.rhs[i].max(0.0);
            }
        }
        let objective: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        let residual = lp.max_violation(&x);
        Ok(LpSolution {
            x,
            report: SolveReport {
                objective,
                kkt_residual: residual,
                iterations: self.pivots,
                status: SolveStatus::Converged,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn max_floor_on_two_point_simplex() {
        // max eps s.t. p_a + p_b = 1, p_a >= eps, p_b >= eps
        let mut lp = LinearProgram::maximize(vec![0.0, 0.0, 1.0]);
        lp.constrain(vec![1.0, 1.0, 0.0], Relation::Eq, 1.0)
            .constrain(vec![1.0, 0.0, -1.0], Relation::Ge, 0.0)
            .constrain(vec![0.0, 1.0, -1.0], Relation::Ge, 0.0);
        let sol = lp.solve().unwrap();
        assert_abs_diff_eq!(sol.x[2], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.report.objective, 0.5, epsilon = 1e-12);
        assert!(sol.report.kkt_residual <= 1e-9);
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.constrain(vec![1.0, 0.0], Relation::Le, 4.0)
            .constrain(vec![0.0, 2.0], Relation::Le, 12.0)
            .constrain(vec![3.0, 2.0], Relation::Le, 18.0);
        let sol = lp.solve().unwrap();
        assert_abs_diff_eq!(sol.x[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.x[1], 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.report.objective, 36.0, epsilon = 1e-12);
    }

    #[test]
    fn minimization_with_ge_rows() {
        // min x + y s.t. x + 2y >= 4, 3x + y >= 6 -> (1.6, 1.2)
        let mut lp = LinearProgram::minimize(vec![1.0, 1.0]);
        lp.constrain(vec![1.0, 2.0], Relation::Ge, 4.0)
            .constrain(vec![3.0, 1.0], Relation::Ge, 6.0);
        let sol = lp.solve().unwrap();
        assert_abs_diff_eq!(sol.x[0], 1.6, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.x[1], 1.2, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.report.objective, -2.8, epsilon = 1e-12);
    }

    #[test]
    fn infeasible_is_reported() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.constrain(vec![1.0], Relation::Le, 1.0)
            .constrain(vec![1.0], Relation::Ge, 2.0);
        assert!(matches!(lp.solve(), Err(Error::Infeasible(_))));
    }

    #[test]
    fn unbounded_is_reported() {
        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.constrain(vec![0.0, 1.0], Relation::Le, 1.0);
        assert!(matches!(lp.solve(), Err(Error::Unbounded)));
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::maximize(vec![1.0, 2.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 1.0)
            .constrain(vec![2.0, 2.0], Relation::Eq, 2.0)
            .constrain(vec![0.0, 1.0], Relation::Le, 0.75);
        let sol = lp.solve().unwrap();
        assert_abs_diff_eq!(sol.x[1], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.x[0], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_program_terminates() {
        // Classic cycling example under the textbook rule; Bland's rule must finish.
        let mut lp = LinearProgram::maximize(vec![0.75, -150.0, 0.02, -6.0]);
        lp.constrain(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0)
            .constrain(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0)
            .constrain(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let sol = lp.solve().unwrap();
        assert_abs_diff_eq!(sol.report.objective, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn repeated_solves_are_bit_identical() {
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0, 1.0]);
        lp.constrain(vec![1.0, 1.0, 1.0], Relation::Le, 1.0)
            .constrain(vec![1.0, -1.0, 0.0], Relation::Ge, 0.1);
        let a = lp.solve().unwrap();
        let b = lp.solve().unwrap();
        assert_eq!(
            a.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}
