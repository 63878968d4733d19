//! Closed-form least-favorable densities and projections for capacities whose
//! Möbius mass sits on singletons plus at most one two-outcome set, the
//! structure of the two-player entry game.

use serde::{Deserialize, Serialize};

use crate::capacity::{Capacity, Density, OutcomeSet};
use crate::error::{Error, Result};

const ETA_TOL: f64 = 1e-9;
const FOCAL_TOL: f64 = 1e-14;

/// Entry-game summaries of a capacity on `(00, 01, 10, 11)`: `eta1` is the
/// mass not pinned to `00` or `11`, and `[eta3, eta2]` is the range of
/// probabilities the core allows for `10`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameEtas {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
}

impl GameEtas {
    pub fn new(eta1: f64, eta2: f64, eta3: f64) -> Result<Self> {
        let ordered = -ETA_TOL <= eta3 && eta3 <= eta2 + ETA_TOL && eta2 <= eta1 + ETA_TOL && eta1 <= 1.0 + ETA_TOL;
        if !ordered {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= eta3 <= eta2 <= eta1 <= 1, got ({eta1}, {eta2}, {eta3})"
            )));
        }
        Ok(Self { eta1, eta2, eta3 })
    }

    /// Reads the etas and the pinned masses `(f00, f11)` off a capacity on
    /// the four entry-game outcomes in the order `00, 01, 10, 11`.
    pub fn from_capacity(c: &Capacity) -> Result<(Self, f64, f64)> {
        if c.cardinality() != 4 {
            return Err(Error::InvalidArgument("entry-game capacities have four outcomes".into()));
        }
        let f00 = c.value(OutcomeSet::singleton(0));
        let f11 = c.value(OutcomeSet::singleton(3));
        let etas = Self::new(1.0 - f00 - f11, c.plausibility(2), c.value(OutcomeSet::singleton(2)))?;
        Ok((etas, f00, f11))
    }
}

/// Which branch of the clipped closed form is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GameRegime {
    /// `p_rel * eta1` lies in `[eta3, eta2]` (boundary ties included).
    Interior,
    /// `p_rel * eta1 > eta2`: the upper bound binds.
    Upper,
    /// `p_rel * eta1 < eta3`: the lower bound binds.
    Lower,
}

impl GameRegime {
    pub fn classify(e: &GameEtas, p_rel: f64) -> Self {
        let z = p_rel * e.eta1;
        if z > e.eta2 {
            GameRegime::Upper
        } else if z < e.eta3 {
            GameRegime::Lower
        } else {
            GameRegime::Interior
        }
    }
}

fn clipped(e: &GameEtas, p_rel: f64) -> f64 {
    match GameRegime::classify(e, p_rel) {
        GameRegime::Interior => p_rel * e.eta1,
        GameRegime::Upper => e.eta2,
        GameRegime::Lower => e.eta3,
    }
}

fn game_density(e: &GameEtas, q10: f64, f00: f64, f11: f64) -> Result<Density> {
    Density::normalized(vec![f00, (e.eta1 - q10).max(0.0), q10, f11])
}

fn check_game_inputs(e: &GameEtas, p: &Density, f00: f64, f11: f64) -> Result<()> {
    if p.len() != 4 {
        return Err(Error::InvalidArgument("entry-game densities have four outcomes".into()));
    }
    if (f00 + f11 + e.eta1 - 1.0).abs() > ETA_TOL {
        return Err(Error::InvalidArgument(format!(
            "f00 + f11 + eta1 = {} must equal 1",
            f00 + f11 + e.eta1
        )));
    }
    GameEtas::new(e.eta1, e.eta2, e.eta3)?;
    Ok(())
}

/// Least-favorable density of the entry game against `p` (outcome order
/// `00, 01, 10, 11`): `q(00) = f00`, `q(11) = f11`, `q(10)` is
/// `eta1 * p(10) / (p(10) + p(01))` clipped to `[eta3, eta2]`, and `q(01)`
/// takes the rest of `eta1`.
pub fn entry_game_lfp(e: &GameEtas, p: &Density, f00: f64, f11: f64) -> Result<Density> {
    check_game_inputs(e, p, f00, f11)?;
    let mixed = p.prob(1) + p.prob(2);
    if !(mixed > 0.0) {
        return Err(Error::InvalidArgument("p must put positive mass on 01 or 10".into()));
    }
    game_density(e, clipped(e, p.prob(2) / mixed), f00, f11)
}

/// Kullback-Leibler projection of `p_hat` onto the entry-game core. The
/// stationarity condition has the same clipped-ratio solution as
/// [`entry_game_lfp`]; when `p_hat` has no mass on `01` or `10` the
/// objective is flat in `q(10)` and the midpoint of `[eta3, eta2]` is used.
pub fn entry_game_projection(e: &GameEtas, p_hat: &Density, f00: f64, f11: f64) -> Result<Density> {
    check_game_inputs(e, p_hat, f00, f11)?;
    let mixed = p_hat.prob(1) + p_hat.prob(2);
    let q10 = if mixed > 0.0 {
        clipped(e, p_hat.prob(2) / mixed)
    } else {
        0.5 * (e.eta3 + e.eta2)
    };
    game_density(e, q10, f00, f11)
}

enum Structure {
    Additive(Vec<f64>),
    /// Singleton masses and the pair `(i, j)` carrying mass `mult`.
    Pair { singles: Vec<f64>, i: usize, j: usize, mult: f64 },
}

fn structure(c: &Capacity) -> Option<Structure> {
    let m = c.cardinality();
    let mobius = c.mobius();
    let singles: Vec<f64> = (0..m).map(|y| mobius[1 << y].max(0.0)).collect();
    let mut pair = None;
    for (a, &w) in mobius.iter().enumerate() {
        let set = OutcomeSet(a as u32);
        if set.len() < 2 || w.abs() <= FOCAL_TOL {
            continue;
        }
        if set.len() > 2 || pair.is_some() || w < 0.0 {
            return None;
        }
        let mut it = set.iter();
        pair = Some((it.next()?, it.next()?, w));
    }
    Some(match pair {
        None => Structure::Additive(singles),
        Some((i, j, mult)) => Structure::Pair { singles, i, j, mult },
    })
}

fn solve_pair(singles: &[f64], i: usize, j: usize, mult: f64, w_i: f64, w_j: f64, flat: Option<f64>) -> Option<Density> {
    let lo = singles[i];
    let hi = singles[i] + mult;
    let eta = singles[i] + singles[j] + mult;
    let z = if w_i + w_j > 0.0 {
        (eta * w_i / (w_i + w_j)).clamp(lo, hi)
    } else {
        flat?
    };
    let mut q = singles.to_vec();
    q[i] = z;
    q[j] = eta - z;
    Density::normalized(q).ok()
}

/// Closed-form least-favorable density when `c` is additive or has a single
/// non-singleton focal set of size two. Returns `None` when the structure
/// does not apply or the minimizer is not unique.
pub fn closed_form_lfp(c: &Capacity, p: &Density) -> Option<Density> {
    if p.len() != c.cardinality() {
        return None;
    }
    match structure(c)? {
        Structure::Additive(s) => Density::normalized(s).ok(),
        Structure::Pair { singles, i, j, mult } => solve_pair(&singles, i, j, mult, p.prob(i), p.prob(j), None),
    }
}

/// Closed-form Kullback-Leibler projection under the same structure as
/// [`closed_form_lfp`].
pub fn closed_form_projection(c: &Capacity, p_hat: &Density) -> Option<Density> {
    if p_hat.len() != c.cardinality() {
        return None;
    }
    match structure(c)? {
        Structure::Additive(s) => Density::normalized(s).ok(),
        Structure::Pair { singles, i, j, mult } => {
            let mid = singles[i] + 0.5 * mult;
            solve_pair(&singles, i, j, mult, p_hat.prob(i), p_hat.prob(j), Some(mid))
        }
    }
}
