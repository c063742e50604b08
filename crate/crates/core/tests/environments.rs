//! Environment behavior observed through the evaluation harness.

use std::sync::Arc;

use deepcorr::crosswalk::{CrosswalkEnv, CrosswalkParams, Mode};
use deepcorr::envcore::ZeroValues;
use deepcorr::fisheries::{fixed_policy, FisheriesEnv, FisheriesParams};
use deepcorr::fusion::FusionRule;
use deepcorr::harness::{
    convergence_track, crosswalk_fusion, evaluate, fisheries_baselines, greedy, policy_slice, EvalConfig, SliceConfig,
};
use deepcorr::numerics::ParamNet;
use deepcorr::qlearn::{train_with_prior, DqnConfig};
use deepcorr::rng::SimRng;

fn empty_road() -> CrosswalkParams {
    CrosswalkParams {
        appearance_probability: 0.0,
        initial_presence: 0.0,
        ..CrosswalkParams::default()
    }
}

fn crosswalk_cfg(n: usize, params: &CrosswalkParams) -> EvalConfig {
    EvalConfig {
        n_sims: n,
        seeds: vec![3],
        max_steps: 1_000,
        seconds_per_step: params.decision_period,
    }
}

#[test]
fn on_an_empty_road_full_throttle_is_fastest_and_safe() {
    let params = empty_road();
    let env = CrosswalkEnv::new(params.clone(), Mode::Evaluation).unwrap();
    let cfg = crosswalk_cfg(50, &params);
    let mut times = Vec::new();
    for a in 0..params.accelerations.len() {
        let report = evaluate(&env, move |_: &[f64], _: &mut SimRng| Ok(a), &cfg).unwrap().report;
        assert_eq!(report.crash_pct, 0.0);
        times.push((params.accelerations[a], report.success_pct, report.mean_time_to_cross));
    }
    let (accel, success, fastest) = times[times.len() - 1];
    assert_eq!(accel, 2.0);
    assert_eq!(success, 100.0);
    for &(_, _, t) in &times[..times.len() - 1] {
        assert!(t.is_none_or(|t| t > fastest.unwrap()), "{times:?}");
    }
}

#[test]
fn evaluation_is_reproducible_and_seed_sensitive() {
    let params = FisheriesParams::default();
    let env = FisheriesEnv::new(params.clone()).unwrap();
    let policy = fixed_policy(params.n_boats, 2);
    let run = |seeds: Vec<u64>| {
        let cfg = EvalConfig {
            n_sims: 20,
            seeds,
            ..EvalConfig::default()
        };
        evaluate(&env, |s: &[f64], r: &mut SimRng| Ok(policy(s, r)), &cfg).unwrap()
    };
    assert_eq!(run(vec![1]), run(vec![1]));
    assert_ne!(run(vec![1]).episodes, run(vec![2]).episodes);
}

#[test]
fn greedy_fishing_collapses_while_moderate_fishing_persists() {
    let rows = fisheries_baselines(&FisheriesParams::default(), &EvalConfig::default()).unwrap();
    let get = |label: &str| &rows.iter().find(|(l, _)| l == label).unwrap().1;
    assert!(get("fixed-1").collapse_pct > 90.0);
    assert_eq!(get("fixed-0.1").collapse_pct, 0.0);
    assert!(get("fixed-0.3").mean_return > get("fixed-0.1").mean_return);
    assert!(get("fixed-0.3").mean_return > get("random").mean_return);
}

#[test]
fn slice_of_a_constant_network_is_constant() {
    let params = CrosswalkParams::default();
    let dim = params.history * 4;
    let weights = vec![0.0; dim * 4];
    let net = ParamNet::from_layers(&[dim, 4], false, &[weights], &[vec![0.0, 3.0, 1.0, 2.0]]).unwrap();
    let cfg = SliceConfig::default();
    let grid = policy_slice(&net, &params, 1, &cfg).unwrap();
    assert_eq!(grid.len(), cfg.x_points * cfg.y_points);
    assert!(grid.actions.iter().flatten().all(|&a| a == 1));
    let mut csv = Vec::new();
    grid.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), grid.len() + 1);
    assert!(text.starts_with("ego_x,ped_y,action,acceleration\n"));
    assert!(text.lines().nth(1).unwrap().ends_with(",1,-2.0"));

    // the same network fused over all slots sees a multi-pedestrian input
    let fused = crosswalk_fusion(&params, Arc::new(net), FusionRule::MaxMin).unwrap();
    let grid = policy_slice(&fused, &params, params.max_pedestrians, &cfg).unwrap();
    assert!(grid.actions.iter().flatten().all(|&a| a == 1));
}

#[test]
fn snapshot_evaluation_leaves_training_untouched() {
    let params = CrosswalkParams::default();
    let mut env = CrosswalkEnv::with_slots(params.clone(), Mode::Training, 1).unwrap();
    let cfg = DqnConfig {
        total_train_steps: 600,
        hidden_layers: vec![8],
        ..DqnConfig::crosswalk()
    };
    let plain = train_with_prior::<_, ZeroValues>(&mut env.clone(), &cfg, None, &mut |_, _| Ok(())).unwrap();
    let eval_env = CrosswalkEnv::with_slots(params.clone(), Mode::Evaluation, 1).unwrap();
    let eval_cfg = crosswalk_cfg(5, &params);
    let (tracked, points) = convergence_track(
        600,
        200,
        |hook| train_with_prior::<_, ZeroValues>(&mut env, &cfg, None, hook),
        |net: &ParamNet<f64>| Ok(evaluate(&eval_env, greedy(net), &eval_cfg)?.report),
    )
    .unwrap();
    assert_eq!(plain.net, tracked.net);
    assert_eq!(points.iter().map(|p| p.step).collect::<Vec<_>>(), vec![0, 200, 400, 600]);
    for p in &points {
        assert_eq!(p.report.n_sims, 5);
        let total = p.report.crash_pct + p.report.success_pct + p.report.timeout_pct;
        assert!((total - 100.0).abs() < 1e-9);
    }
    assert!(points.iter().all(|p| p.report.collapse_pct == 0.0));
}
