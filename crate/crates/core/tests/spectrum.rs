mod common;

use common::{dense_eigenphases, match_phases};
use proptest::prelude::*;
use qmean::spectrum::{
    canonical_phase, certify_key_property, eigenphase_function, full_spectrum, principal_alpha, root_solutions,
    SolutionKind,
};
use qmean::{linalg, GroverOperator, UniRv};

fn angle_rv() -> impl Strategy<Value = UniRv> {
    (1usize..=6).prop_flat_map(|k| {
        (prop::collection::vec(0.02f64..1.0, k), prop::collection::vec(-3.1f64..3.1, k)).prop_map(|(w, t)| {
            let s: f64 = w.iter().sum();
            let mut p: Vec<f64> = w.iter().map(|v| v / s).collect();
            let rest: f64 = p[1..].iter().sum();
            p[0] = 1.0 - rest;
            UniRv::new(p, t).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn grover_operator_is_unitary(theta in angle_rv()) {
        let g = GroverOperator::new(&theta).unwrap();
        prop_assert!(g.matrix().unitarity_defect() < 1e-12);
    }

    #[test]
    fn spectrum_matches_dense_oracle(theta in angle_rv()) {
        let g = GroverOperator::new(&theta).unwrap();
        let sols = full_spectrum(&theta).unwrap();
        let found: Vec<f64> = sols.iter().map(|s| s.alpha).collect();
        prop_assert!(match_phases(&dense_eigenphases(&g), &found) <= 1e-8);
        for s in &sols {
            prop_assert!(g.residual(s) <= 1e-9);
        }
    }

    #[test]
    fn overlaps_resolve_the_identity(theta in angle_rv()) {
        let total: f64 = full_spectrum(&theta).unwrap().iter().map(|s| s.overlap).sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn roots_zero_the_eigenphase_function(theta in angle_rv()) {
        for s in root_solutions(&theta).unwrap() {
            // f has poles at the angles; compare against its local slope scale.
            let f = eigenphase_function(&theta, s.alpha);
            let slope: f64 = theta.probs().iter().zip(theta.values())
                .map(|(p, t)| p / (2.0 * ((t - s.alpha) / 2.0).cos().powi(2)))
                .sum();
            prop_assert!(f.abs() <= 1e-9 * slope.max(1.0));
        }
    }

    #[test]
    fn canonical_phase_lands_in_half_open_interval(x in -100.0f64..100.0) {
        let y = canonical_phase(x);
        prop_assert!(y > -std::f64::consts::PI && y <= std::f64::consts::PI);
        prop_assert!(common::circ(x, y) < 1e-9);
    }
}

#[test]
fn eigenvectors_are_orthonormal() {
    let mut r = common::rng(11);
    for k in 2..=6 {
        let theta = common::degenerate_angles(&mut r, &[k / 2, k - k / 2], false);
        let sols = full_spectrum(&theta).unwrap();
        for (i, a) in sols.iter().enumerate() {
            for (j, b) in sols.iter().enumerate() {
                let ip = linalg::inner(&a.state, &b.state).norm();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-9, "k = {k}, ({i}, {j}): {ip}");
            }
        }
    }
}

#[test]
fn degenerate_solutions_are_orthogonal_to_the_synthesizer_state() {
    let mut r = common::rng(5);
    let theta = common::degenerate_angles(&mut r, &[1, 2, 3], true);
    let g = GroverOperator::new(&theta).unwrap();
    let sols = full_spectrum(&theta).unwrap();
    let degenerate: Vec<_> = sols.iter().filter(|s| s.kind == SolutionKind::Degenerate).collect();
    // Classes of sizes 2 and 3 (one member shifted by a full turn) leave 1 + 2 directions.
    assert_eq!(degenerate.len(), 3);
    for s in degenerate {
        assert!(s.overlap < 1e-20);
        assert!(linalg::inner(&s.state, g.one_state()).norm() < 1e-10);
    }
}

#[test]
fn single_outcome_is_a_pure_phase() {
    let theta = UniRv::new(vec![1.0], vec![0.7]).unwrap();
    let sols = full_spectrum(&theta).unwrap();
    assert_eq!(sols.len(), 1);
    assert!((sols[0].alpha - 0.7).abs() < 1e-12);
    assert!((principal_alpha(&theta).unwrap() - 0.7).abs() < 1e-12);
}

#[test]
fn key_property_rejects_out_of_domain_inputs() {
    let rv = UniRv::new(vec![0.5, 0.5], vec![-0.1, 0.3]).unwrap();
    // |E X| = 0.1 exceeds ε.
    assert!(certify_key_property(&rv, 0.05, 0.3).is_err());
    // ε > s0.
    assert!(certify_key_property(&rv, 0.2, 0.1).is_err());
    let (cert, _) = certify_key_property(&rv, 0.1, 0.33).unwrap();
    assert!(cert.passed(), "{cert:?}");
}

#[test]
fn kernel_runs_in_single_precision() {
    let theta = qmean::prob::UniRv::<f32>::new(vec![0.25, 0.75], vec![0.4, -0.2]).unwrap();
    let g = qmean::spectrum::GroverOperator::<f32>::new(&theta).unwrap();
    let sols = full_spectrum(&theta).unwrap();
    assert_eq!(sols.len(), 2);
    for s in &sols {
        assert!(g.residual(s) < 1e-4);
    }
}
