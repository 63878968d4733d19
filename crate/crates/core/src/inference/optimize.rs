//! Box-constrained multistart Nelder-Mead.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

pub const STARTS: usize = 5;
pub const MAX_ITER: usize = 500;
pub const TOL: f64 = 1e-6;
/// Criterion values closer than this count as tied.
const TIE_VALUE: f64 = 1e-9;
/// Tied optima farther apart than this flag the criterion as flat.
const TIE_DISTANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SearchBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidArgument("search box bounds must have equal, positive length".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidArgument("search box needs finite bounds with lower <= upper".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| v.clamp(*l, *u))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| l <= v && v <= u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub theta: Vec<f64>,
    pub value: f64,
    /// Several starts reached the same value at distinct points.
    pub non_identified: bool,
}

/// Latin hypercube design of `count` points in the box.
pub fn latin_hypercube<R: Rng + ?Sized>(b: &SearchBox, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let d = b.dim();
    let mut columns: Vec<Vec<usize>> = (0..d)
        .map(|_| {
            let mut perm: Vec<usize> = (0..count).collect();
            perm.shuffle(rng);
            perm
        })
        .collect();
    (0..count)
        .map(|k| {
            (0..d)
                .map(|j| {
                    let cell = std::mem::take(&mut columns[j][k]);
                    let u: f64 = rng.gen();
                    b.lower[j] + (b.upper[j] - b.lower[j]) * (cell as f64 + u) / count as f64
                })
                .collect()
        })
        .collect()
}

/// Nelder-Mead from `start`, evaluating `f` at box-clamped points.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, start: &[f64], b: &SearchBox, max_iter: usize, tol: f64) -> (Vec<f64>, f64) {
    let d = b.dim();
    let eval = |x: &[f64]| {
        let v = f(&b.clamp(x));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let free: Vec<usize> = (0..d).filter(|&j| b.upper[j] > b.lower[j]).collect();
    let x0 = b.clamp(start);
    if free.is_empty() {
        let v = eval(&x0);
        return (x0, v);
    }
    let mut simplex: Vec<Vec<f64>> = vec![x0.clone()];
    for &j in &free {
        let mut x = x0.clone();
        let step = 0.1 * (b.upper[j] - b.lower[j]);
        x[j] = if x[j] + step <= b.upper[j] { x[j] + step } else { x[j] - step };
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();
    let k = simplex.len();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &c| values[a].total_cmp(&values[c]).then(a.cmp(&c)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = if values[0].is_finite() && values[k - 1].is_finite() {
            values[k - 1] - values[0]
        } else if values.iter().all(|v| v.is_infinite()) {
            0.0
        } else {
            f64::INFINITY
        };
        let diameter = simplex[1..]
            .iter()
            .map(|x| x.iter().zip(&simplex[0]).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= tol && diameter <= tol {
            break;
        }

        let centroid: Vec<f64> = (0..d)
            .map(|j| simplex[..k - 1].iter().map(|x| x[j]).sum::<f64>() / (k - 1) as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            b.clamp(&centroid.iter().zip(&simplex[k - 1]).map(|(c, w)| c + t * (c - w)).collect::<Vec<_>>())
        };
        let xr = along(1.0);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = along(2.0);
            let fe = eval(&xe);
            if fe < fr {
                simplex[k - 1] = xe;
                values[k - 1] = fe;
            } else {
                simplex[k - 1] = xr;
                values[k - 1] = fr;
            }
        } else if fr < values[k - 2] {
            simplex[k - 1] = xr;
            values[k - 1] = fr;
        } else {
            let (xc, fc) = if fr < values[k - 1] {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < values[k - 1].min(fr) {
                simplex[k - 1] = xc;
                values[k - 1] = fc;
            } else {
                for i in 1..k {
                    simplex[i] = b.clamp(
                        &simplex[0].iter().zip(&simplex[i]).map(|(a, c)| a + 0.5 * (c - a)).collect::<Vec<_>>(),
                    );
                    values[i] = eval(&simplex[i]);
                }
            }
        }
    }
    let best = (0..k)
        .min_by(|&a, &c| values[a].total_cmp(&values[c]).then(a.cmp(&c)))
        .expect("nonempty simplex");
    (b.clamp(&simplex[best]), values[best])
}

/// Minimizes `f` over the box from [`STARTS`] Latin-hypercube starts drawn
/// from the optimizer stream of `seed`. The lowest value wins; exact ties
/// go to the earliest start.
pub fn multistart_minimize(f: &dyn Fn(&[f64]) -> f64, b: &SearchBox, seed: u64) -> Optimum {
    if b.lower == b.upper {
        return Optimum {
            theta: b.lower.clone(),
            value: f(&b.lower),
            non_identified: false,
        };
    }
    let mut rng = stream(seed, 0, Purpose::Optimizer);
    let starts = latin_hypercube(b, STARTS, &mut rng);
    let runs: Vec<(Vec<f64>, f64)> = starts.iter().map(|s| nelder_mead(f, s, b, MAX_ITER, TOL)).collect();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate().skip(1) {
        if r.1 < runs[best].1 {
            best = i;
        }
    }
    let (theta, value) = runs[best].clone();
    let non_identified = runs.iter().any(|(x, v)| {
        let tied = (v - value).abs() <= TIE_VALUE || (v.is_infinite() && value.is_infinite());
        let far = x.iter().zip(&theta).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max) > TIE_DISTANCE;
        tied && far
    });
    Optimum {
        theta,
        value,
        non_identified,
    }
}
