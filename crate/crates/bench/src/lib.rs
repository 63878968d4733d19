//! Fixtures shared by the benchmarks.

use univinf_core::capacity::{containment_from_random_set, Capacity, Density, OutcomeSet, RandomSetDistribution};
use univinf_core::inference::{Criterion, Dataset};
use univinf_core::models::{ChoiceModel, EntryGame};
use univinf_core::simulation::{simulate_dgp, McDesign, SelectionPolicy, XLaw};

/// Entry-game capacity on `00, 01, 10, 11` at interaction effects `beta`.
pub fn game_capacity(beta: [f64; 2]) -> Capacity {
    EntryGame::without_covariates()
        .capacity(&beta, &[])
        .expect("valid interaction effects")
}

/// A capacity on `m` outcomes with mass on every singleton and every pair.
pub fn dense_capacity(m: usize) -> Capacity {
    let mut atoms = Vec::new();
    for y in 0..m {
        atoms.push((OutcomeSet::singleton(y), 1.0));
    }
    for a in 0..m {
        for b in a + 1..m {
            atoms.push((OutcomeSet::from_indices([a, b]), 0.5));
        }
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    let atoms: Vec<_> = atoms.into_iter().map(|(s, w)| (s, w / total)).collect();
    containment_from_random_set(&RandomSetDistribution::new(m, atoms).expect("normalized"))
}

/// A strictly positive, non-uniform density on `m` outcomes.
pub fn tilted_density(m: usize) -> Density {
    Density::normalized((1..=m).map(|k| k as f64).collect()).expect("positive")
}

/// One simulated sample of the no-covariate entry-game design.
pub fn game_sample(n: usize, beta: f64, seed: u64) -> Dataset {
    simulate_dgp(
        &EntryGame::without_covariates(),
        &[beta, beta],
        &XLaw::Empty,
        SelectionPolicy::FixedProb { p: 0.5 },
        n,
        seed,
    )
    .expect("valid design")
}

/// The no-covariate design with `replications` replications at one alternative.
pub fn small_design(n: usize, h: f64, replications: usize) -> McDesign {
    McDesign::table1(n, Criterion::Mle, vec![h], replications)
}
