use proptest::prelude::*;
use univinf_core::capacity::{
    choquet_integral, containment_from_random_set, core_membership, Density, OutcomeSet, RandomSetDistribution,
};
use univinf_core::models::{ChoiceModel, EntryGame};
use univinf_core::solvers::{closed_form_lfp, feasibility_density, kl_projection, lfp_density, ZERO_PLAUSIBILITY};

fn simplex(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, m).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    })
}

fn random_set(m: usize) -> impl Strategy<Value = RandomSetDistribution> {
    (prop::collection::vec(1u32..(1 << m), 1..6), simplex(6)).prop_map(move |(sets, w)| {
        let total: f64 = w[..sets.len()].iter().sum();
        RandomSetDistribution::new(m, sets.iter().zip(&w).map(|(s, v)| (OutcomeSet(*s), v / total))).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_outputs_lie_in_the_core(d in random_set(4), p in simplex(4)) {
        let c = containment_from_random_set(&d);
        // Outcomes no predicted set contains get no alternative mass.
        let restricted: Vec<f64> = p.iter().enumerate().map(|(y, v)| if c.plausibility(y) > ZERO_PLAUSIBILITY { *v } else { 0.0 }).collect();
        let p = Density::normalized(restricted).unwrap();
        let feasible = feasibility_density(&c);
        if let Ok(f) = feasible {
            prop_assert!(core_membership(&f, &c));
        }
        let (q, _) = lfp_density(&c, &p).unwrap();
        prop_assert!(core_membership(&q, &c));
        let (r, _) = kl_projection(&p, &c).unwrap();
        prop_assert!(core_membership(&r, &c));
    }

    #[test]
    fn choquet_is_monotone_and_translation_equivariant(
        d in random_set(3),
        f in prop::collection::vec(-3.0f64..3.0, 3),
        bump in prop::collection::vec(0.0f64..1.0, 3),
        shift in -2.0f64..2.0,
    ) {
        let c = containment_from_random_set(&d);
        let g: Vec<f64> = f.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let shifted: Vec<f64> = f.iter().map(|a| a + shift).collect();
        let base = choquet_integral(&f, &c).unwrap();
        prop_assert!(choquet_integral(&g, &c).unwrap() >= base - 1e-12);
        prop_assert!((choquet_integral(&shifted, &c).unwrap() - base - shift).abs() < 1e-9);
    }

    #[test]
    fn game_closed_form_matches_the_solver(b1 in -3.0f64..0.0, b2 in -3.0f64..0.0, p in simplex(4)) {
        let game = EntryGame::without_covariates();
        let c = game.capacity(&[b1, b2], &[]).unwrap();
        let p = Density::new(p).unwrap();
        let closed = closed_form_lfp(&c, &p).unwrap();
        let (solved, _) = lfp_density(&c, &p).unwrap();
        for (a, b) in closed.probs().iter().zip(solved.probs()) {
            prop_assert!((a - b).abs() < 1e-6);
        }
    }
}
