use proptest::prelude::*;
use qmean::prob::Outcome;
use qmean::{fixtures, Error, FiniteDist, UniRv};

fn dist(d: usize) -> impl Strategy<Value = FiniteDist> {
    (1usize..=6).prop_flat_map(move |k| {
        (prop::collection::vec(0.01f64..1.0, k), prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), k))
            .prop_map(move |(w, xs)| {
                let s: f64 = w.iter().sum();
                let outcomes = w.iter().zip(xs).map(|(p, x)| Outcome { p: p / s, x }).collect();
                FiniteDist::new(d, outcomes).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn covariance_is_psd_and_trace_matches(d in dist(3)) {
        let cov = d.covariance();
        prop_assert!(cov.is_psd());
        let mean = d.mean();
        let direct: f64 = d.outcomes().iter()
            .map(|o| o.p * o.x.iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).sum::<f64>())
            .sum();
        prop_assert!((cov.trace() - direct).abs() < 1e-10);
        let ev: f64 = cov.eigenvalues().iter().sum();
        prop_assert!((ev - cov.trace()).abs() < 1e-9);
    }

    #[test]
    fn projection_variance_is_the_quadratic_form(d in dist(2), u0 in -0.5f64..0.5, u1 in -0.5f64..0.5) {
        let u = [u0, u1];
        let var = d.project(&u).unwrap().moments().variance;
        prop_assert!((var - d.covariance().quadratic_form(&u)).abs() < 1e-10);
    }

    #[test]
    fn truncation_zeroes_exactly_the_far_outcomes(d in dist(2), k in 0.0f64..6.0) {
        let t = d.truncate(k).unwrap();
        for (a, b) in d.outcomes().iter().zip(t.outcomes()) {
            let norm = a.x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let expect: Vec<f64> = if norm > k { vec![0.0; 2] } else { a.x.clone() };
            prop_assert_eq!(&b.x, &expect);
            prop_assert_eq!(a.p, b.p);
        }
    }

    #[test]
    fn shift_scale_is_affine(d in dist(2), s in prop::collection::vec(-2.0f64..2.0, 2), c in 0.1f64..4.0) {
        let m = d.shift_scale(&s, c).unwrap().mean();
        let m0 = d.mean();
        for a in 0..2 {
            prop_assert!((m[a] - (m0[a] - s[a]) / c).abs() < 1e-12);
        }
        let tr = d.shift_scale(&s, c).unwrap().covariance().trace();
        prop_assert!((tr - d.covariance().trace() / (c * c)).abs() < 1e-9);
    }

    #[test]
    fn upper_quantile_has_the_required_tail(d in dist(1), q in 0.01f64..1.0) {
        let rv = d.coordinate(0).unwrap();
        let y = rv.upper_quantile(q);
        prop_assert!(rv.tail_at_least(y) >= q - 1e-12);
        // No larger atom carries tail mass q.
        for &v in rv.values() {
            if v > y {
                prop_assert!(rv.tail_at_least(v) < q - 1e-12);
            }
        }
    }

    #[test]
    fn json_round_trip(d in dist(2)) {
        let back = FiniteDist::from_json_str(&d.to_json_string()).unwrap();
        prop_assert_eq!(back, d);
    }
}

#[test]
fn rejects_malformed_distributions() {
    let bad =
        |d: usize, o: Vec<(f64, Vec<f64>)>| FiniteDist::new(d, o.into_iter().map(|(p, x)| Outcome { p, x }).collect());
    assert!(matches!(bad(1, vec![]), Err(Error::InvalidDistribution { .. })));
    assert!(matches!(bad(1, vec![(0.5, vec![1.0])]), Err(Error::InvalidDistribution { .. })));
    assert!(matches!(bad(1, vec![(1.2, vec![1.0]), (-0.2, vec![0.0])]), Err(Error::InvalidDistribution { .. })));
    assert!(matches!(bad(2, vec![(1.0, vec![1.0])]), Err(Error::InvalidDistribution { .. })));
    assert!(matches!(bad(1, vec![(1.0, vec![f64::NAN])]), Err(Error::InvalidDistribution { .. })));
    assert!(FiniteDist::from_json_str("{\"dim\": 1}").is_err());
}

#[test]
fn bundled_distributions_load_and_are_normalized() {
    for (name, _) in fixtures::BUNDLED {
        let d = fixtures::bundled(name).unwrap();
        let total: f64 = d.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-12, "{name}");
        assert!(d.covariance().is_psd(), "{name}");
    }
    assert!(fixtures::bundled("nope").is_err());
    let d2 = fixtures::bundled("d2_six").unwrap();
    let m = d2.mean();
    assert!((m[0] - 0.09).abs() < 1e-12 && (m[1] - 0.01).abs() < 1e-12);
    assert!((d2.covariance().trace() - 0.3068).abs() < 1e-12);
}

#[test]
fn univariate_moments_and_angle_map() {
    let rv = UniRv::new(vec![0.25, 0.75], vec![-2.0, 2.0]).unwrap();
    let m = rv.moments();
    assert_eq!((m.mean, m.variance, m.second_moment), (1.0, 3.0, 4.0));
    // Clamp at 1/(λε) = 1 before the angle map.
    let theta = rv.to_angle(1.0, 1.0).unwrap();
    let edge = 2.0 * 0.5f64.atan();
    assert!((theta.values()[0] + edge).abs() < 1e-15 && (theta.values()[1] - edge).abs() < 1e-15);
    assert_eq!(rv.truncate(1.5).unwrap().values(), &[-1.5, 1.5]);
}
