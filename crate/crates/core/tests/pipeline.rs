use univinf_core::inference::{
    crossfit_lr, split_sample, Criterion, Decision, GridSpec, HypothesisSpec, SearchBox, SolverRoute, TestConfig,
};
use univinf_core::models::{ChoiceModel, EntryGame};
use univinf_core::simulation::{mc_table, run_replications, simulate_dgp, McDesign, SelectionPolicy, XLaw};

fn box2() -> SearchBox {
    SearchBox::new(vec![-3.0, -3.0], vec![0.0, 0.0]).unwrap()
}

#[test]
fn strong_interaction_is_rejected_against_zero() {
    let game = EntryGame::without_covariates();
    let data = simulate_dgp(&game, &[-1.5, -1.5], &XLaw::Empty, SelectionPolicy::FixedProb { p: 0.5 }, 400, 3).unwrap();
    let hyp = HypothesisSpec::new(vec![vec![0.0, 0.0]], box2()).unwrap();
    let rec = crossfit_lr(&data, &split_sample(&data, 3).unwrap(), &hyp, &game, &TestConfig::default()).unwrap();
    assert_eq!(rec.decision, Decision::Reject);
    assert!(rec.s_n() > 20.0);
}

#[test]
fn true_null_is_retained_under_every_selection() {
    let game = EntryGame::without_covariates();
    let hyp = HypothesisSpec::new(vec![vec![-1.0, -1.0]], box2()).unwrap();
    for policy in SelectionPolicy::adversarial_suite() {
        let data = simulate_dgp(&game, &[-1.0, -1.0], &XLaw::Empty, policy, 300, 11).unwrap();
        let rec = crossfit_lr(&data, &split_sample(&data, 11).unwrap(), &hyp, &game, &TestConfig::default()).unwrap();
        assert_eq!(rec.decision, Decision::FailToReject, "{policy:?}");
    }
}

#[test]
fn restricted_estimate_is_a_grid_point() {
    let game = EntryGame::without_covariates();
    let data = simulate_dgp(&game, &[-0.8, -0.4], &XLaw::Empty, SelectionPolicy::AlwaysSecond, 200, 5).unwrap();
    let grid = GridSpec::Lattice {
        lower: vec![-2.0, -2.0],
        upper: vec![0.0, 0.0],
        step: vec![0.5, 0.5],
    }
    .points()
    .unwrap();
    let hyp = HypothesisSpec::new(grid.clone(), box2()).unwrap();
    let rec = crossfit_lr(&data, &split_sample(&data, 5).unwrap(), &hyp, &game, &TestConfig::default()).unwrap();
    for dir in [&rec.forward, &rec.swapped] {
        assert_eq!(grid[dir.theta_hat0_index], dir.theta_hat0);
        assert!(box2().contains(&dir.theta_hat1));
        assert!(dir.loglik_restricted.0.is_finite());
    }
}

#[test]
fn routes_agree_on_the_incomplete_game() {
    let game = EntryGame::without_covariates();
    let data = simulate_dgp(&game, &[-1.0, -0.6], &XLaw::Empty, SelectionPolicy::FixedProb { p: 0.3 }, 150, 8).unwrap();
    let hyp = HypothesisSpec::new(vec![vec![-1.0, -1.0], vec![-0.5, -0.5]], box2()).unwrap();
    let plan = split_sample(&data, 8).unwrap();
    let auto = crossfit_lr(&data, &plan, &hyp, &game, &TestConfig::default()).unwrap();
    let generic = TestConfig {
        route: SolverRoute::Generic,
        ..TestConfig::default()
    };
    let solver = crossfit_lr(&data, &plan, &hyp, &game, &generic).unwrap();
    assert!((auto.log_s_n.0 - solver.log_s_n.0).abs() < 1e-5);
}

#[test]
fn small_null_study_controls_size_and_mean() {
    let d = McDesign::table1(60, Criterion::Mle, vec![0.0], 200);
    let model = d.model.build().unwrap();
    let out = run_replications(&d, model.as_ref(), 60, Criterion::Mle, 0.0).unwrap();
    let rejections = out.iter().filter(|o| o.decision == Decision::Reject).count();
    assert!(rejections <= 10 + 3 * 3, "{rejections} rejections out of 200");
    let mean = out.iter().map(|o| o.log_s_n.exp()).sum::<f64>() / out.len() as f64;
    assert!(mean < 1.5, "mean S_n {mean}");
}

#[test]
fn power_grows_with_the_interaction() {
    let d = McDesign::table1(100, Criterion::Mle, vec![0.0, 0.4, 0.9], 100);
    let t = mc_table(&d).unwrap();
    let p: Vec<f64> = t.rows.iter().map(|r| r.power).collect();
    assert!(p[0] <= p[1] && p[1] <= p[2], "{p:?}");
    assert!(p[2] > 0.8);
}

#[test]
fn moment_and_mle_estimates_are_in_the_box() {
    let game = EntryGame::without_covariates();
    let data = simulate_dgp(&game, &[-0.7, -0.7], &XLaw::Empty, SelectionPolicy::AlwaysFirst, 120, 2).unwrap();
    let hyp = HypothesisSpec::new(vec![vec![0.0, 0.0]], box2()).unwrap();
    let plan = split_sample(&data, 2).unwrap();
    for criterion in [Criterion::Moment, Criterion::Mle, Criterion::Entrants] {
        let config = TestConfig {
            criterion,
            ..TestConfig::default()
        };
        let rec = crossfit_lr(&data, &plan, &hyp, &game, &config).unwrap();
        assert!(box2().contains(&rec.forward.theta_hat1), "{criterion:?}");
        assert!(game.check_theta(&rec.swapped.theta_hat1).is_ok());
    }
}
