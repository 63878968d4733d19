//! Set functions on a finite outcome space.
//!
//! Subsets of an outcome space with `m` elements are `m`-bit masks and every
//! set function is stored densely as an array of length `2^m`.

mod choquet;
mod monotone;

pub use choquet::choquet_integral;
pub use monotone::{check_k_monotone, check_k_monotone_with};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::lp::{LinearProgram, Relation};

/// Largest supported outcome space.
pub const MAX_OUTCOMES: usize = 20;
/// Masses below this are treated as quadrature noise and pruned.
pub const PRUNE_MASS: f64 = 1e-14;
/// Slack allowed on core inequalities.
pub const CORE_TOL: f64 = 1e-9;
/// Tolerance on probability normalization.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Ordered, labelled finite outcome space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeSpace {
    labels: Vec<String>,
}

impl OutcomeSpace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 || labels.len() > MAX_OUTCOMES {
            return Err(Error::InvalidSpace(format!(
                "need between 2 and {MAX_OUTCOMES} outcomes, got {}",
                labels.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidSpace(format!("duplicate label {l:?}")));
            }
        }
        Ok(Self { labels })
    }

    pub fn cardinality(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, y: usize) -> &str {
        &self.labels[y]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn full(&self) -> OutcomeSet {
        OutcomeSet::full(self.cardinality())
    }
}

/// A subset of an outcome space, as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct OutcomeSet(pub u32);

impl OutcomeSet {
    pub const EMPTY: OutcomeSet = OutcomeSet(0);

    pub fn full(m: usize) -> Self {
        OutcomeSet(((1u64 << m) - 1) as u32)
    }

    pub fn singleton(y: usize) -> Self {
        OutcomeSet(1 << y)
    }

    pub fn from_indices(ys: impl IntoIterator<Item = usize>) -> Self {
        OutcomeSet(ys.into_iter().fold(0, |acc, y| acc | (1 << y)))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, y: usize) -> bool {
        self.0 & (1 << y) != 0
    }

    pub fn insert(&mut self, y: usize) {
        self.0 |= 1 << y;
    }

    pub fn union(self, other: Self) -> Self {
        OutcomeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        OutcomeSet(self.0 & other.0)
    }

    pub fn complement(self, m: usize) -> Self {
        OutcomeSet(!self.0 & Self::full(m).0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&y| self.0 & (1 << y) != 0)
    }

    /// Renders the set with the labels of `space`, e.g. `{10,01}`.
    pub fn display(self, space: &OutcomeSpace) -> String {
        let parts: Vec<&str> = self.iter().map(|y| space.label(y)).collect();
        format!("{{{}}}", parts.join(","))
    }
}

/// Iterates over all nonempty proper subsets of an `m`-element space.
pub fn proper_subsets(m: usize) -> impl Iterator<Item = OutcomeSet> {
    (1u32..((1u64 << m) - 1) as u32).map(OutcomeSet)
}

/// Finite distribution of a random set: nonempty focal sets with masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSetDistribution {
    m: usize,
    atoms: Vec<(OutcomeSet, f64)>,
}

impl RandomSetDistribution {
    /// Validates, merges duplicate sets, prunes masses below [`PRUNE_MASS`]
    /// and renormalizes. Atoms are kept sorted by mask.
    pub fn new(m: usize, atoms: impl IntoIterator<Item = (OutcomeSet, f64)>) -> Result<Self> {
        if !(1..=MAX_OUTCOMES).contains(&m) {
            return Err(Error::InvalidRandomSet(format!("unsupported cardinality {m}")));
        }
        let full = OutcomeSet::full(m);
        let mut merged: BTreeMap<OutcomeSet, f64> = BTreeMap::new();
        let mut total = 0.0;
        for (set, w) in atoms {
            if set.is_empty() || !set.is_subset_of(full) {
                return Err(Error::InvalidRandomSet(format!(
                    "focal set mask {:#b} is empty or outside the space",
                    set.0
                )));
            }
            if !(0.0..=1.0 + SIMPLEX_TOL).contains(&w) || !w.is_finite() {
                return Err(Error::InvalidRandomSet(format!("mass {w} outside [0, 1]")));
            }
            *merged.entry(set).or_insert(0.0) += w;
            total += w;
        }
        // Aggregated quadrature weights accumulate rounding well above 1e-12.
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidRandomSet(format!("masses sum to {total}, not 1")));
        }
        let kept: Vec<(OutcomeSet, f64)> = merged.into_iter().filter(|&(_, w)| w >= PRUNE_MASS).collect();
        let kept_total: f64 = kept.iter().map(|(_, w)| w).sum();
        let atoms = kept.into_iter().map(|(s, w)| (s, w / kept_total)).collect();
        Ok(Self { m, atoms })
    }

    pub fn cardinality(&self) -> usize {
        self.m
    }

    pub fn atoms(&self) -> &[(OutcomeSet, f64)] {
        &self.atoms
    }

    pub fn mass_of(&self, set: OutcomeSet) -> f64 {
        self.atoms
            .iter()
            .find(|(s, _)| *s == set)
            .map_or(0.0, |&(_, w)| w)
    }
}

/// Normalized monotone set function `nu` over the subsets of an `m`-element space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    m: usize,
    values: Vec<f64>,
}

impl Capacity {
    pub fn new(m: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_OUTCOMES).contains(&m) {
            return Err(Error::InvalidCapacity(format!("unsupported cardinality {m}")));
        }
        let n = 1usize << m;
        if values.len() != n {
            return Err(Error::InvalidCapacity(format!(
                "expected {n} values, got {}",
                values.len()
            )));
        }
        if values[0].abs() > SIMPLEX_TOL {
            return Err(Error::InvalidCapacity("nu(empty) must be 0".into()));
        }
        if (values[n - 1] - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidCapacity("nu(full space) must be 1".into()));
        }
        for (a, &v) in values.iter().enumerate() {
            if !v.is_finite() || !(-SIMPLEX_TOL..=1.0 + SIMPLEX_TOL).contains(&v) {
                return Err(Error::InvalidCapacity(format!("value {v} at mask {a:#b} outside [0, 1]")));
            }
            for y in 0..m {
                let b = a | (1 << y);
                if values[b] < v - SIMPLEX_TOL {
                    return Err(Error::InvalidCapacity(format!(
                        "not monotone: nu({a:#b}) = {v} > nu({b:#b}) = {}",
                        values[b]
                    )));
                }
            }
        }
        Ok(Self { m, values })
    }

    /// Builds an additive capacity from a density.
    pub fn additive(q: &Density) -> Self {
        let m = q.len();
        let mut values = vec![0.0; 1 << m];
        for (a, v) in values.iter_mut().enumerate() {
            *v = OutcomeSet(a as u32).iter().map(|y| q.prob(y)).sum();
        }
        values[(1 << m) - 1] = 1.0;
        Self { m, values }
    }

    /// The vacuous capacity: zero on every proper subset.
    pub fn vacuous(m: usize) -> Self {
        let mut values = vec![0.0; 1 << m];
        values[(1 << m) - 1] = 1.0;
        Self { m, values }
    }

    pub fn cardinality(&self) -> usize {
        self.m
    }

    pub fn value(&self, a: OutcomeSet) -> f64 {
        self.values[a.0 as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `nu*({y}) = 1 - nu(Y \ {y})`.
    pub fn plausibility(&self, y: usize) -> f64 {
        1.0 - self.value(OutcomeSet::singleton(y).complement(self.m))
    }

    pub fn is_additive(&self, tol: f64) -> bool {
        (0..self.m).map(|y| self.value(OutcomeSet::singleton(y))).sum::<f64>() >= 1.0 - tol
    }

    /// Möbius inverse: `m(A) = sum_{B subset A} (-1)^{|A \ B|} nu(B)`.
    pub fn mobius(&self) -> Vec<f64> {
        let mut f = self.values.clone();
        for y in 0..self.m {
            let bit = 1 << y;
            for a in 0..f.len() {
                if a & bit != 0 {
                    f[a] -= f[a ^ bit];
                }
            }
        }
        f
    }

    /// Pairs `(A, nu(A))` forced to hold with equality on the core:
    /// `nu(A) + nu(A^c) = 1`. For 2-monotone capacities these are exactly
    /// the constraints that are tight at every core element.
    pub fn implicit_equalities(&self, tol: f64) -> Vec<OutcomeSet> {
        proper_subsets(self.m)
            .filter(|&a| self.value(a) + self.value(a.complement(self.m)) >= 1.0 - tol)
            .collect()
    }
}

/// Probability vector over an outcome space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    probs: Vec<f64>,
}

impl Density {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDensity("empty probability vector".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDensity(format!("negative or non-finite entry {p}")));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidDensity(format!("entries sum to {s}")));
        }
        Ok(Self { probs })
    }

    /// Clamps round-off negatives to zero and rescales to unit mass.
    pub fn normalized(mut probs: Vec<f64>) -> Result<Self> {
        for p in probs.iter_mut() {
            if *p < 0.0 && *p > -1e-9 {
                *p = 0.0;
            }
        }
        let s: f64 = probs.iter().sum();
        if !(s > 0.0) {
            return Err(Error::InvalidDensity("zero total mass".into()));
        }
        Self::new(probs.into_iter().map(|p| p / s).collect())
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            probs: vec![1.0 / m as f64; m],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, y: usize) -> f64 {
        self.probs[y]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mass(&self, a: OutcomeSet) -> f64 {
        a.iter().map(|y| self.probs[y]).sum()
    }

    pub fn max_abs_diff(&self, other: &Density) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.probs.iter().map(|p| format!("{p:.6}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `nu(A) = sum of masses of focal sets contained in A`.
pub fn containment_from_random_set(d: &RandomSetDistribution) -> Capacity {
    let m = d.cardinality();
    let n = 1usize << m;
    let mut values = vec![0.0; n];
    for &(set, w) in d.atoms() {
        values[set.0 as usize] += w;
    }
    // Zeta transform over the subset lattice.
    for y in 0..m {
        let bit = 1 << y;
        for a in 0..n {
            if a & bit != 0 {
                values[a] += values[a ^ bit];
            }
        }
    }
    for v in values.iter_mut() {
        *v = v.min(1.0);
    }
    values[0] = 0.0;
    values[n - 1] = 1.0;
    Capacity { m, values }
}

/// `nu*(A) = 1 - nu(A^c)`.
pub fn conjugate(c: &Capacity) -> Capacity {
    let m = c.m;
    let full = OutcomeSet::full(m);
    let values = (0..c.values.len())
        .map(|a| 1.0 - c.value(OutcomeSet(a as u32).complement(m)))
        .collect::<Vec<_>>();
    let mut out = Capacity { m, values };
    out.values[0] = 0.0;
    out.values[full.0 as usize] = 1.0;
    out
}

/// Whether `q(A) >= nu(A)` (up to [`CORE_TOL`]) for every event `A`.
pub fn core_membership(q: &Density, c: &Capacity) -> bool {
    q.len() == c.m && (0..c.values.len()).all(|a| q.mass(OutcomeSet(a as u32)) >= c.values[a] - CORE_TOL)
}

/// Appends the core constraints of `c` for the first `m` variables of an LP.
pub(crate) fn add_core_rows(lp: &mut LinearProgram, c: &Capacity) {
    let m = c.m;
    let width = lp.num_vars();
    let mut ones = vec![0.0; width];
    ones[..m].fill(1.0);
    lp.constrain(ones, Relation::Eq, 1.0);
    for a in proper_subsets(m) {
        let nu = c.value(a);
        if nu <= 0.0 {
            continue;
        }
        let mut row = vec![0.0; width];
        for y in a.iter() {
            row[y] = 1.0;
        }
        lp.constrain(row, Relation::Ge, nu);
    }
}

/// `min_{Q in core(c)} Q(A)`, by linear programming over the core.
pub fn lower_envelope(c: &Capacity, a: OutcomeSet) -> Result<f64> {
    let m = c.m;
    if !a.is_subset_of(OutcomeSet::full(m)) {
        return Err(Error::InvalidArgument(format!("event {:#b} outside the space", a.0)));
    }
    let mut obj = vec![0.0; m];
    for y in a.iter() {
        obj[y] = 1.0;
    }
    let mut lp = LinearProgram::minimize(obj);
    add_core_rows(&mut lp, c);
    let sol = lp.solve().map_err(|e| match e {
        Error::Infeasible(msg) => Error::Infeasible(format!("empty core: {msg}")),
        other => other,
    })?;
    Ok(a.iter().map(|y| sol.x[y]).sum())
}
