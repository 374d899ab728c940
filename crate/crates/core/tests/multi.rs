mod common;

use proptest::prelude::*;
use qmean::multi::{
    self, build_v_channel, geometric_median, notso_eps0, notso_kickstart_trials, simple_s0, simple_scale,
    v_channel_params, variance_tail_check, ClassicalMultiPlan, FullPlan, MeticulousPlan, QuantilePlan, RefineMultiPlan,
    SimplePlan, XI,
};
use qmean::{fixtures, Error, EstimatorConfig, FiniteDist, Inner, LatticeSpec, UniRv, VMode};

// Frozen values below come from an independent arbitrary-precision evaluation
// of the closed forms.

#[test]
fn frozen_plan_constants() {
    let cfg = EstimatorConfig::default();
    let r = RefineMultiPlan::new(2, 0.05, 0.2).unwrap();
    assert_eq!((r.resolution, r.trials), (1024, 43));
    assert!((simple_scale(1, 2.0) - 536.656_314_599_949_5).abs() < 1e-9);
    assert!((simple_scale(2, 2.0) - 638.195_507_633_398_6).abs() < 1e-9);
    assert!((simple_s0(2) - 0.007_386_522_079_090_262).abs() < 1e-15);

    let m = MeticulousPlan::new(2, 4.0, 1.0, 0.2, &cfg).unwrap();
    assert_eq!(m.resolution, 512);
    let v = v_channel_params(64, 1.0, 1.0 / 3.0, XI).unwrap();
    assert_eq!(v.n_v, 1248);
    assert!((v.delta_v - 0.000_657_462_195_923_734_4).abs() < 1e-15);
    assert!((v.proof_bound - 0.005_259_697_567_389_875).abs() < 1e-15);
    assert!(v.proof_bound < XI * XI);

    assert_eq!(notso_kickstart_trials(2.0, 0.2), 3097.0);
    assert!((notso_eps0(2.0, 1.0) - 2.0 / 15.0 * 20f64.sqrt()).abs() < 1e-15);

    let f = FullPlan::new(4.0, 0.2, &cfg).unwrap();
    assert!((f.p - 25.0 / 416.0).abs() < 1e-16);
    assert_eq!(f.kickstart_trials, 63.0);
    assert!((f.rel_trials - 16.316_862_443_496_91).abs() < 1e-12);
    assert!((f.inner_trials - 11.537_764_081_484_766).abs() < 1e-12);

    let q = QuantilePlan::new(0.1, 0.05, 64.0).unwrap();
    assert_eq!((q.samples, q.rank, q.quantum_cost), (1918, 144, 607));
    assert_eq!(
        ClassicalMultiPlan::new(10.0, 0.05).unwrap(),
        ClassicalMultiPlan { budget: 30, buckets: 24, bucket_size: 1 }
    );
}

#[test]
fn plan_preconditions() {
    let cfg = EstimatorConfig::default();
    assert!(QuantilePlan::new(0.1, 0.6, 64.0).is_err());
    assert!(FullPlan::new(0.9, 0.2, &cfg).is_err(), "p ≥ 1 below n ≈ 0.98");
    assert!(RefineMultiPlan::new(0, 0.1, 0.1).is_err());
    assert!(SimplePlan::new(2, 4.0, 1.0, 0.5, 1.5, 2.0).is_err());
}

#[test]
fn tail_check_matches_the_one_dimensional_closed_form() {
    let d = FiniteDist::scalar(&[0.5, 0.5], &[-1.0, 1.0]).unwrap();
    let lat = LatticeSpec::new(1, 8).unwrap();
    let res = variance_tail_check(&d, lat, 2.0).unwrap();
    // u ∈ {±1/16, ±3/16, ±5/16, ±7/16}, σ² = 1: each |u| carries mass 1/4.
    let want_t: Vec<f64> = [1.0, 3.0, 5.0, 7.0].iter().map(|k: &f64| (k / 16.0).powi(2)).collect();
    assert_eq!(res.grid.len(), 4);
    for (i, t) in want_t.iter().enumerate() {
        assert!((res.grid[i] - t).abs() < 1e-15);
        assert!((res.empirical[i] - (4 - i) as f64 / 4.0).abs() < 1e-15);
        assert!((res.bound[i] - 2.0 * (-t / 2.0).exp()).abs() < 1e-15);
    }
    assert!(res.passed());
    // The tightest admissible D makes the bound hold with equality somewhere.
    let tight = variance_tail_check(&d, lat, res.min_admissible_d).unwrap();
    assert!(tight.passed());
    assert!(!variance_tail_check(&d, lat, res.min_admissible_d * 0.99).unwrap().passed());
}

#[test]
fn tail_check_on_a_point_mass_is_vacuous() {
    let d = FiniteDist::point_mass(vec![1.0, -2.0]).unwrap();
    let res = variance_tail_check(&d, LatticeSpec::new(2, 8).unwrap(), 2.0).unwrap();
    assert!(res.passed() && res.grid.is_empty());
    assert_eq!(res.min_admissible_d, 0.0);
}

fn objective(points: &[Vec<f64>], y: &[f64]) -> f64 {
    points.iter().map(|p| p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()).sum()
}

proptest! {
    #[test]
    fn geometric_median_beats_every_data_point_and_the_mean(
        pts in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 1..12)
    ) {
        let y = geometric_median(&pts, 1e-12);
        let f = objective(&pts, &y);
        let mean: Vec<f64> = (0..3).map(|a| pts.iter().map(|p| p[a]).sum::<f64>() / pts.len() as f64).collect();
        prop_assert!(f <= objective(&pts, &mean) + 1e-7);
        for p in &pts {
            prop_assert!(f <= objective(&pts, p) + 1e-7);
        }
    }
}

#[test]
fn geometric_median_of_collinear_points_is_the_middle_one() {
    let pts: Vec<Vec<f64>> = [0.0, 1.0, 2.0, 10.0, 50.0].iter().map(|&x| vec![x, 2.0 * x]).collect();
    let y = geometric_median(&pts, 1e-14);
    assert!((y[0] - 2.0).abs() < 1e-6 && (y[1] - 4.0).abs() < 1e-6, "{y:?}");
}

#[test]
fn quantile_estimate_lands_in_the_sandwich() {
    let cfg = EstimatorConfig::default();
    let values: Vec<f64> = (1..=100).map(f64::from).collect();
    let rv = UniRv::new(vec![0.01; 100], values).unwrap();
    let (p, c) = (0.1, 0.5);
    let (lo, hi) = (rv.upper_quantile(p), rv.upper_quantile(c * p));
    for seed in 0..50 {
        let k = multi::quantile_estimate(&rv, p, 0.1, seed, &cfg).unwrap().estimate;
        assert!(lo <= k && k <= hi, "seed {seed}: {k} outside [{lo}, {hi}]");
    }
}

#[test]
fn classical_multi_is_exact_on_a_point_mass() {
    let d = FiniteDist::point_mass(vec![0.5, -1.5]).unwrap();
    let r = multi::classical_multi(&d, 20.0, 0.1, 3).unwrap();
    assert!((r.estimate[0] - 0.5).abs() < 1e-12 && (r.estimate[1] + 1.5).abs() < 1e-12);
}

#[test]
fn ideal_channel_deviation_is_exactly_xi_squared() {
    let cfg = EstimatorConfig::default();
    let rv = UniRv::new(vec![0.5, 0.5], vec![-0.2, 0.3]).unwrap();
    let ch = build_v_channel(&rv, 64, 1.0, 1.0 / 3.0, XI, VMode::IdealPhase, 0, &cfg).unwrap();
    assert!((ch.deviation_sq - XI * XI).abs() < 1e-15);
    assert!(ch.certified());
    let phase = (ch.coherent / ch.coherent.norm()).arg();
    assert!(common::circ(phase, 64.0 * ch.mu) < 1e-12);
}

#[test]
fn empirical_channel_meets_the_proof_bound() {
    let cfg = EstimatorConfig::default();
    let rv = UniRv::new(vec![0.3, 0.4, 0.3], vec![-0.5, 0.1, 0.4]).unwrap();
    let ch = build_v_channel(&rv, 16, 1.0, 1.0 / 3.0, XI, VMode::Empirical, 9, &cfg).unwrap();
    assert_eq!(ch.outcomes.len(), cfg.t_emp);
    assert!(ch.within_proof_bound(), "{} > {}", ch.deviation_sq, ch.params.proof_bound);
    // Preconditions: |E X| ≤ ε0 ≤ σ0/3.
    let off = UniRv::new(vec![0.5, 0.5], vec![0.5, 0.9]).unwrap();
    assert!(build_v_channel(&off, 16, 1.0, 1.0 / 3.0, XI, VMode::Empirical, 9, &cfg).is_err());
}

#[test]
fn simple_path_reports_the_amplitude_cap() {
    let cfg = EstimatorConfig::default();
    let d = fixtures::bundled("d2_six").unwrap();
    let s = d.covariance().trace().sqrt();
    let err = multi::notso_multi(&d, 2.0, s, 0.2, Inner::Simple, VMode::IdealPhase, 0, &cfg).unwrap_err();
    assert!(matches!(err, Error::Cap { .. }), "{err}");
    assert_eq!(err.category().exit_code(), 2);
}

#[test]
fn meticulous_is_deterministic_across_thread_counts() {
    let cfg = EstimatorConfig::default();
    let d = fixtures::bundled("d2_four").unwrap();
    let s = d.covariance().trace().sqrt();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| multi::constrained_meticulous(&d, 0.25, s, 0.2, VMode::Empirical, 5, &cfg).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert!(one.v_certificate.as_ref().unwrap().passed());
}

#[test]
fn full_pipeline_is_deterministic_and_certified() {
    let cfg = EstimatorConfig::default();
    let d = fixtures::bundled("d2_four").unwrap();
    let a = multi::full_estimator(&d, 2.0, 0.2, Inner::Meticulous, VMode::IdealPhase, 11, &cfg).unwrap();
    let b = multi::full_estimator(&d, 2.0, 0.2, Inner::Meticulous, VMode::IdealPhase, 11, &cfg).unwrap();
    assert_eq!(a, b);
    let c = a.certificates.as_ref().unwrap();
    assert!(c.all_hold(), "{c:?}");
    assert!(c.kickstart_error <= c.kickstart_target * 5.0);
}

#[test]
fn centred_zero_variable_short_circuits() {
    let cfg = EstimatorConfig::default();
    let d = FiniteDist::point_mass(vec![0.0, 0.0]).unwrap();
    let r = multi::constrained_meticulous(&d, 4.0, 0.0, 0.2, VMode::IdealPhase, 0, &cfg).unwrap();
    assert_eq!(r.estimate, vec![0.0, 0.0]);
    assert_eq!(r.oracle_calls, 0);
}
