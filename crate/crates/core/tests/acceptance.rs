//! Acceptance suite. Each test prints one `[PASS]`/`[FAIL]` line and asserts
//! the criterion. Criterion 8 is out of reach of an exact simulator under the
//! amplitude cap; its line reports FAIL and the test asserts the documented
//! cap error, while the criterion itself lives in an ignored test.

mod common;

use std::time::Instant;

use common::{dense_eigenphases, frequency_floor, match_phases, report};
use qmean::multi::{self, variance_tail_check};
use qmean::phase::{exact_phase_family, lattice_readout, multidim_state, noise_injection, phase_estimate_1d};
use qmean::spectrum::{certify_key_property, full_spectrum, state_distance_bound_check, SolutionKind};
use qmean::uni::{self, loglog_cost_bound, loglog_deltas, loglog_schedule};
use qmean::{
    fixtures, linalg, predict, Algorithm, Complex64, CostReport, Error, EstimatorConfig, FiniteDist, GroverOperator,
    Inner, LatticeSpec, NoiseMode, PEConfig, StateVector, UniRv, VMode,
};
use rand::Rng;

fn line(id: u32, name: &str, pass: bool, detail: &str) {
    report(&format!("[{}] criterion {id:02} {name}: {detail}", if pass { "PASS" } else { "FAIL" }));
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// 80 generic and 20 degenerate angle variables with at most six outcomes.
fn spectrum_corpus() -> Vec<UniRv> {
    let mut r = common::rng(1001);
    let mut out: Vec<UniRv> = (0..80).map(|i| common::random_angles(&mut r, 1 + i % 6)).collect();
    let shapes: [&[usize]; 10] =
        [&[2], &[3], &[2, 2], &[3, 3], &[2, 1, 1], &[4, 2], &[6], &[1, 1, 2, 2], &[5], &[2, 2, 2]];
    for (i, s) in shapes.iter().enumerate() {
        out.push(common::degenerate_angles(&mut r, s, false));
        out.push(common::degenerate_angles(&mut r, s, i % 2 == 0));
    }
    // Zero-probability outcomes are their own eigenvectors.
    let last = out.len() - 1;
    out[last] = UniRv::new(vec![0.5, 0.0, 0.5, 0.0], vec![0.3, 0.3, -1.2, 2.0]).unwrap();
    out
}

#[test]
fn criterion_01_spectrum_completeness() {
    let start = Instant::now();
    let corpus = spectrum_corpus();
    let (mut gap, mut residual, mut count_ok) = (0.0f64, 0.0f64, true);
    for theta in &corpus {
        let g = GroverOperator::new(theta).unwrap();
        let sols = full_spectrum(theta).unwrap();
        count_ok &= sols.len() == theta.len();
        let found: Vec<f64> = sols.iter().map(|s| s.alpha).collect();
        gap = gap.max(match_phases(&dense_eigenphases(&g), &found));
        for s in &sols {
            residual = residual.max(g.residual(s));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = count_ok && gap <= 1e-8 && residual <= 1e-9 && secs < 10.0;
    line(
        1,
        "spectrum completeness",
        pass,
        &format!(
            "{} instances, max phase gap {gap:.2e} (≤ 1e-8), max residual {residual:.2e} (≤ 1e-9), {secs:.2} s",
            corpus.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_02_overlap_formula() {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for theta in spectrum_corpus() {
        let g = GroverOperator::new(&theta).unwrap();
        for s in full_spectrum(&theta).unwrap() {
            let direct = linalg::inner(&s.state, g.one_state()).norm_sqr();
            let formula = match s.kind {
                SolutionKind::Root => {
                    let e: f64 = theta
                        .probs()
                        .iter()
                        .zip(theta.values())
                        .filter(|(p, _)| **p > 0.0)
                        .map(|(p, t)| p * ((t - s.alpha) / 2.0).tan().powi(2))
                        .sum();
                    1.0 / (1.0 + e)
                }
                SolutionKind::Degenerate => 0.0,
            };
            worst = worst.max((direct - formula).abs()).max((s.overlap - formula).abs());
            checked += 1;
        }
    }
    let pass = worst <= 1e-10;
    line(2, "overlap formula", pass, &format!("{checked} eigenpairs, max deviation {worst:.2e} (≤ 1e-10)"));
    assert!(pass);
}

/// 200 variables with `|E X| ≤ ε ≤ s0 ≤ 1/3` and `E X² ≤ s0²`.
fn key_corpus() -> Vec<(UniRv, f64, f64)> {
    let mut r = common::rng(2002);
    (0..200)
        .map(|i| {
            let k = 1 + i % 8;
            let p = common::simplex(&mut r, k, 0.02);
            let bias: f64 = if i % 2 == 0 { r.random_range(-1.0..1.0) } else { 0.0 };
            let raw: Vec<f64> = (0..k).map(|_| bias + r.random_range(-1.0..1.0)).collect();
            let s0: f64 = r.random_range(0.02..1.0 / 3.0);
            let m2: f64 = p.iter().zip(&raw).map(|(p, x)| p * x * x).sum();
            let c = s0 * r.random_range(0.2..1.0) / m2.sqrt();
            let x: Vec<f64> = raw.iter().map(|v| v * c).collect();
            let rv = UniRv::new(p, x).unwrap();
            let mean = rv.moments().mean.abs();
            let eps = (mean + (s0 - mean) * r.random_range(0.05..1.0)).max(1e-6);
            (rv, eps, s0)
        })
        .collect()
}

#[test]
fn criterion_03_key_property_certificate() {
    let start = Instant::now();
    let corpus = key_corpus();
    let mut violations = 0;
    let mut tightest = 0.0f64;
    for (rv, eps, s0) in &corpus {
        let (cert, _) = certify_key_property(rv, *eps, *s0).unwrap();
        if !cert.passed() {
            violations += 1;
        }
        tightest = tightest.max(cert.alpha_error / cert.alpha_bound);
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = violations == 0 && secs < 30.0;
    line(
        3,
        "key property certificate",
        pass,
        &format!("{} variables, {violations} violations, max |α−EX|/bound {tightest:.3}, {secs:.2} s", corpus.len()),
    );
    assert!(pass);
}

#[test]
fn criterion_04_state_distance_bound() {
    let mut violations = 0;
    let mut tightest = 0.0f64;
    let corpus = key_corpus();
    for (rv, eps, s0) in &corpus {
        for n in [1, 8, 64] {
            let b = state_distance_bound_check(rv, *eps, *s0, n).unwrap();
            if !b.holds() {
                violations += 1;
            }
            tightest = tightest.max(b.lhs / b.rhs);
        }
    }
    let pass = violations == 0;
    line(
        4,
        "state distance bound",
        pass,
        &format!("{} checks, {violations} violations, max lhs/rhs {tightest:.3}", corpus.len() * 3),
    );
    assert!(pass);
}

#[test]
fn criterion_05_phase_estimation() {
    let mut r = common::rng(5005);
    let mut failures = Vec::new();
    let mut min_margin = f64::INFINITY;

    // Single register, eigenstate inputs.
    for k in [1, 3, 6] {
        let theta = common::random_angles(&mut r, k);
        let g = GroverOperator::new(&theta).unwrap();
        for sol in full_spectrum(&theta).unwrap() {
            let input = StateVector::outcome_state(sol.state.clone()).unwrap();
            for n in [16, 64] {
                for kappa in [2, 3, 4] {
                    let cfg = PEConfig::new(n, kappa).unwrap();
                    let mass = phase_estimate_1d(g.matrix(), &input, cfg).unwrap().window_mass(
                        0,
                        sol.alpha / std::f64::consts::TAU,
                        kappa,
                    );
                    min_margin = min_margin.min(mass - cfg.success_factor());
                    if mass < cfg.success_factor() {
                        failures.push(format!("1-D |Ω|={k} N={n} κ={kappa}: {mass}"));
                    }
                }
            }
        }
    }

    // Lattice readout of plane waves, clean and with injected state error.
    let init = StateVector::outcome_state(vec![Complex64::new(1.0, 0.0)]).unwrap();
    for d in [1usize, 2] {
        for trial in 0..4 {
            let x: Vec<f64> = (0..d).map(|_| r.random_range(-0.49..0.49)).collect();
            let n = 16;
            let lat = LatticeSpec::new(d, n).unwrap();
            let clean = multidim_state(exact_phase_family(x.clone()), lat, &init, n as u64).unwrap();
            let mut cases = vec![(0.0, lattice_readout(&clean).unwrap())];
            for eps in [1.0 / 24.0, 1.0 / 12.0] {
                for mode in [NoiseMode::OrthogonalJunk, NoiseMode::PhaseJitter] {
                    let noisy = noise_injection(&clean, eps, mode, 100 + trial).unwrap();
                    cases.push((eps, lattice_readout(&noisy).unwrap()));
                }
            }
            for (eps, table) in &cases {
                for kappa in [2, 3, 4] {
                    let bound = 1.0 / (2.0 * (kappa as f64 - 1.0)) + 2.0 * eps;
                    for (a, &xa) in x.iter().enumerate() {
                        let f = table.failure_mass(a, xa, kappa);
                        min_margin = min_margin.min(bound - f);
                        if f > bound {
                            failures.push(format!("d={d} ε={eps} κ={kappa} axis {a}: {f} > {bound}"));
                        }
                    }
                }
            }
        }
    }
    let pass = failures.is_empty();
    line(5, "phase estimation tables", pass, &format!("{} violations, min margin {min_margin:.3e}", failures.len()));
    assert!(pass, "{failures:?}");
}

#[test]
fn criterion_06_loglog_schedule() {
    let mut r = common::rng(6006);
    let r_factor = 2.0;
    // The cost-ratio limit grows with δ, so its value at the largest δ bounds the sweep.
    let constant = loglog_cost_bound(r_factor, 0.5).unwrap();
    let (mut union_ok, mut worst_ratio) = (true, 0.0f64);
    for _ in 0..100 {
        let t: usize = r.random_range(1..=20);
        let delta: f64 = r.random_range(1e-4..0.5);
        let deltas = loglog_deltas(t, delta);
        union_ok &= deltas.iter().sum::<f64>() <= delta;
        let s = loglog_schedule(r_factor.powi(t as i32), 1.0, r_factor, delta).unwrap();
        union_ok &= s.t == t && s.union_bound() <= delta;
        worst_ratio = worst_ratio.max(s.cost_ratio());
    }
    let pass = union_ok && worst_ratio <= constant;
    line(
        6,
        "log-log schedule",
        pass,
        &format!("Σδ'_j ≤ δ on all 100 draws: {union_ok}; max cost ratio {worst_ratio:.3} ≤ {constant:.3}"),
    );
    assert!(pass);
}

#[test]
fn criterion_07_univariate_estimator() {
    let start = Instant::now();
    let cfg = EstimatorConfig::default();
    let trials = 300;
    let mut worst = (f64::INFINITY, String::new());
    let mut all_ok = true;
    for name in fixtures::UNIVARIATE {
        let rv = fixtures::bundled(name).unwrap().coordinate(0).unwrap();
        let m = rv.moments();
        let sigma0 = m.variance.sqrt();
        for n in [4.0, 8.0, 16.0] {
            let delta = 0.1;
            let hits = (0..trials as u64)
                .filter(|&seed| {
                    let est = uni::notso_uni(&rv, sigma0, n, delta, seed, &cfg).unwrap().estimate;
                    (est - m.mean).abs() <= sigma0 / n
                })
                .count();
            let freq = hits as f64 / trials as f64;
            all_ok &= freq >= frequency_floor(delta, trials);
            if freq < worst.0 {
                worst = (freq, format!("{name} n={n}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = all_ok && secs < 300.0;
    line(
        7,
        "univariate estimator",
        pass,
        &format!(
            "9 configurations × {trials} trials, lowest success {:.3} at {} (floor {:.3}), {secs:.1} s",
            worst.0,
            worst.1,
            frequency_floor(0.1, trials)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_simple_multivariate_estimator() {
    let cfg = EstimatorConfig::default();
    let dist = fixtures::bundled("d2_six").unwrap();
    let sigma0 = dist.covariance().trace().sqrt();
    let mut needed = Vec::new();
    for n in [2.0, 4.0] {
        match multi::notso_multi(&dist, n, sigma0, 0.2, Inner::Simple, VMode::IdealPhase, 0, &cfg) {
            Err(Error::Cap { needed: k, cap, .. }) => needed.push((n, k, cap)),
            other => panic!("expected the amplitude cap at n = {n}, got {other:?}"),
        }
    }
    line(
        8,
        "simple multivariate estimator",
        false,
        &format!(
            "not attainable under the 2^22 amplitude cap: the first round already needs {} (n = 2) and {} (n = 4) amplitudes; \
             see the ignored test and the d = 1 supplement",
            needed[0].1, needed[1].1
        ),
    );
}

fn simple_success(dist: &FiniteDist, n: f64, trials: u64) -> f64 {
    let cfg = EstimatorConfig::default();
    let sigma0 = dist.covariance().trace().sqrt();
    let mean = dist.mean();
    let hits = (0..trials)
        .filter(|&seed| {
            let r = multi::notso_multi(dist, n, sigma0, 0.2, Inner::Simple, VMode::IdealPhase, seed, &cfg).unwrap();
            linf(&r.estimate, &mean) <= sigma0 / n
        })
        .count();
    hits as f64 / trials as f64
}

/// The criterion as stated. It cannot run: the lattice state exceeds the cap.
#[test]
#[ignore = "needs about 2^34 amplitudes per round, far beyond the 2^22 cap"]
fn criterion_08_simple_multivariate_estimator_as_stated() {
    let dist = fixtures::bundled("d2_six").unwrap();
    for n in [2.0, 4.0] {
        assert!(simple_success(&dist, n, 100) >= frequency_floor(0.2, 100));
    }
}

/// Same estimator and guarantee at `d = 1`, where the lattice fits.
#[test]
fn criterion_08_supplement_simple_estimator_in_one_dimension() {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut pass = true;
    for name in ["uni_centered", "uni_skewed"] {
        let dist = fixtures::bundled(name).unwrap();
        for n in [2.0, 4.0] {
            let freq = simple_success(&dist, n, 100);
            pass &= freq >= frequency_floor(0.2, 100);
            detail.push(format!("{name} n={n}: {freq:.2}"));
        }
    }
    report(&format!(
        "[{}] criterion 08 supplement (d = 1, 100 trials, floor {:.3}): {}, {:.1} s",
        if pass { "PASS" } else { "FAIL" },
        frequency_floor(0.2, 100),
        detail.join("; "),
        start.elapsed().as_secs_f64()
    ));
    assert!(pass);
}

#[test]
fn criterion_09_meticulous_channel_certificate() {
    let start = Instant::now();
    let cfg = EstimatorConfig::default();
    let base = fixtures::bundled("d2_six").unwrap();
    let sigma0 = base.covariance().trace().sqrt();

    // Recentre at an off-origin mean so that ⟨u, E X⟩ varies over the lattice.
    let target = [0.12, -0.115];
    let shift: Vec<f64> = base.mean().iter().zip(target).map(|(m, t)| m - t).collect();
    let dist = base.shift_scale(&shift, 1.0).unwrap();
    let r = multi::constrained_meticulous(&dist, 0.5, sigma0, 0.2, VMode::Empirical, 9, &cfg).unwrap();
    let cert = r.v_certificate.clone().expect("channel certificate");
    let plan = multi::MeticulousPlan::new(2, 0.5, sigma0, 0.2, &cfg).unwrap();
    let cert_ok =
        cert.passed() && cert.threshold == plan.v.proof_bound && cert.points == 64 * 64 && plan.resolution == 64;

    // End to end in ideal-phase mode.
    let mean = base.mean();
    let mut rates = Vec::new();
    let mut e2e_ok = true;
    for n in [2.0, 4.0] {
        let hits = (0..100u64)
            .filter(|&seed| {
                let r = multi::notso_multi(&base, n, sigma0, 0.2, Inner::Meticulous, VMode::IdealPhase, seed, &cfg)
                    .unwrap();
                r.v_certificate.as_ref().is_some_and(|c| c.passed()) && linf(&r.estimate, &mean) <= sigma0 / n
            })
            .count();
        let freq = hits as f64 / 100.0;
        e2e_ok &= freq >= frequency_floor(0.2, 100);
        rates.push(format!("n={n}: {freq:.2}"));
    }
    let pass = cert_ok && e2e_ok;
    line(
        9,
        "meticulous channel certificate",
        pass,
        &format!(
            "empirical channel on {} points (N = {}), max deviation² {:.3e} ≤ proof bound {:.3e}, {} violations; \
             ideal-phase success {} (floor {:.3}), {:.1} s",
            cert.points,
            plan.resolution,
            cert.max_deviation_sq,
            cert.proof_bound,
            cert.violations,
            rates.join(", "),
            frequency_floor(0.2, 100),
            start.elapsed().as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_tail_lemma_gate() {
    let mut checked = Vec::new();
    let mut failed = Vec::new();
    for (name, _) in fixtures::BUNDLED {
        let dist = fixtures::bundled(name).unwrap();
        if dist.dim() > 2 {
            continue;
        }
        let lat = LatticeSpec::new(dist.dim(), 8).unwrap();
        let res = variance_tail_check(&dist, lat, 2.0).unwrap();
        checked.push(format!("{name} (min D {:.3})", res.min_admissible_d));
        if !res.passed() {
            failed.push(name.to_string());
        }
    }
    let pass = failed.is_empty();
    line(10, "tail lemma gate", pass, &format!("D = 2, N = 8: {}; violations in {failed:?}", checked.join(", ")));
    assert!(pass);
}

struct SweepCase {
    alg: Algorithm,
    run: Box<dyn Fn(u64) -> qmean::Result<CostReport>>,
}

fn uni_case(alg: Algorithm, f: impl Fn(u64) -> qmean::Result<uni::EstimateReport> + 'static) -> SweepCase {
    SweepCase { alg, run: Box::new(move |s| f(s).map(|r| r.cost)) }
}

fn multi_case(alg: Algorithm, f: impl Fn(u64) -> qmean::Result<qmean::MultiEstimateReport> + 'static) -> SweepCase {
    SweepCase { alg, run: Box::new(move |s| f(s).map(|r| r.cost)) }
}

fn sweep() -> Vec<SweepCase> {
    let cfg = EstimatorConfig::default();
    let centered = fixtures::bundled("uni_centered").unwrap();
    let skewed = fixtures::bundled("uni_skewed").unwrap();
    let d2_six = fixtures::bundled("d2_six").unwrap();
    let d2_four = fixtures::bundled("d2_four").unwrap();
    let rv_c = centered.coordinate(0).unwrap();
    let rv_s = skewed.coordinate(0).unwrap();
    let mut cases = Vec::new();

    for eps in [0.02, 0.05, 0.08] {
        for delta in [0.05, 0.2] {
            let rv = rv_c.clone();
            cases.push(uni_case(Algorithm::RefineUni { eps, delta }, move |s| {
                uni::refine_uni(&rv, eps, delta, s, &cfg)
            }));
        }
    }
    let sigma_s = rv_s.moments().variance.sqrt();
    let shifted = rv_s.map(|x| x - 1.2);
    for (n, sigma0) in [(2.0, sigma_s), (8.0, sigma_s), (32.0, sigma_s), (8.0, 2.0 * sigma_s), (64.0, 2.0 * sigma_s)] {
        let rv = shifted.clone();
        let eps0 = sigma0 / 3.0;
        cases.push(uni_case(Algorithm::ConstrainedUni { n, sigma0, eps0, delta: 0.1 }, move |s| {
            uni::constrained_uni(&rv, sigma0, eps0, n, 0.1, s, &cfg)
        }));
    }
    for (n, delta) in [(1.0, 0.01), (1.0, 0.3), (10.0, 0.01), (10.0, 0.3)] {
        let rv = rv_s.clone();
        cases.push(uni_case(Algorithm::MedianOfMeans { n, delta }, move |s| uni::median_of_means_rv(&rv, n, delta, s)));
    }
    for name in fixtures::UNIVARIATE {
        let rv = fixtures::bundled(name).unwrap().coordinate(0).unwrap();
        let sigma0 = rv.moments().variance.sqrt();
        for n in [4.0, 16.0] {
            let rv = rv.clone();
            cases.push(uni_case(Algorithm::NotsoUni { n, sigma0, delta: 0.1 }, move |s| {
                uni::notso_uni(&rv, sigma0, n, 0.1, s, &cfg)
            }));
        }
    }
    let unit = rv_s.map(|x| x / 9.0);
    for n in [2.0, 4.0, 8.0] {
        let rv = unit.clone();
        cases.push(uni_case(Algorithm::BoundedRel { n, delta: 0.2 }, move |s| {
            uni::bounded_rel_estimator(&rv, n, 0.2, s, &cfg)
        }));
    }
    let tiny = FiniteDist::scalar(&[0.5, 0.5], &[-1e-4, 1.2e-4]).unwrap();
    for delta in [0.1, 0.3] {
        let d = tiny.clone();
        let eps = 1.0 / 900.0;
        cases.push(multi_case(Algorithm::RefineMulti { d: 1, eps, delta }, move |s| {
            multi::refine_multi(&d, eps, delta, s, &cfg)
        }));
    }
    let sigma_c = centered.covariance().trace().sqrt();
    for n in [8.0, 16.0] {
        let d = centered.clone();
        cases.push(multi_case(
            Algorithm::ConstrainedSimple { d: 1, n, sigma0: sigma_c, eps0: 0.05, delta: 0.2 },
            move |s| multi::constrained_simple(&d, n, sigma_c, 0.05, 0.2, s, &cfg),
        ));
    }
    let sigma_2 = d2_six.covariance().trace().sqrt();
    for (n, mode) in
        [(0.5, VMode::IdealPhase), (1.0, VMode::IdealPhase), (2.0, VMode::IdealPhase), (0.25, VMode::Empirical)]
    {
        let d = d2_six.clone();
        cases.push(multi_case(Algorithm::ConstrainedMeticulous { d: 2, n, sigma0: sigma_2, delta: 0.2 }, move |s| {
            multi::constrained_meticulous(&d, n, sigma_2, 0.2, mode, s, &cfg)
        }));
    }
    for n in [1.0, 2.0] {
        let d = centered.clone();
        cases.push(multi_case(Algorithm::ConstrainedMeticulous { d: 1, n, sigma0: sigma_c, delta: 0.1 }, move |s| {
            multi::constrained_meticulous(&d, n, sigma_c, 0.1, VMode::IdealPhase, s, &cfg)
        }));
    }
    for (n, delta) in [(5.0, 0.1), (5.0, 0.3), (50.0, 0.1), (50.0, 0.3)] {
        let d = d2_four.clone();
        cases
            .push(multi_case(Algorithm::ClassicalMulti { n, delta }, move |s| multi::classical_multi(&d, n, delta, s)));
    }
    let norms = d2_six.norm_rv();
    for (p, delta) in [(0.05, 0.1), (0.05, 0.4), (0.2, 0.1), (0.2, 0.4)] {
        let rv = norms.clone();
        cases.push(uni_case(Algorithm::Quantile { p, delta }, move |s| {
            multi::quantile_estimate(&rv, p, delta, s, &cfg)
        }));
    }
    {
        let d = centered.clone();
        cases.push(multi_case(
            Algorithm::NotsoMulti { d: 1, n: 4.0, sigma0: sigma_c, delta: 0.2, inner: Inner::Simple },
            move |s| multi::notso_multi(&d, 4.0, sigma_c, 0.2, Inner::Simple, VMode::IdealPhase, s, &cfg),
        ));
    }
    for n in [1.0, 2.0] {
        let d = d2_six.clone();
        let inner = Inner::Meticulous;
        cases.push(multi_case(Algorithm::NotsoMulti { d: 2, n, sigma0: sigma_2, delta: 0.2, inner }, move |s| {
            multi::notso_multi(&d, n, sigma_2, 0.2, inner, VMode::IdealPhase, s, &cfg)
        }));
    }
    for (d, n, inner) in
        [(&d2_six, 2.0, Inner::Meticulous), (&d2_four, 2.0, Inner::Meticulous), (&d2_four, 4.0, Inner::Meticulous)]
    {
        let dist = d.clone();
        cases.push(multi_case(Algorithm::Full { d: 2, n, delta: 0.2, inner }, move |s| {
            multi::full_estimator(&dist, n, 0.2, inner, VMode::IdealPhase, s, &cfg)
        }));
    }
    for dist in [&centered, &skewed] {
        let dist = dist.clone();
        cases.push(multi_case(Algorithm::Full { d: 1, n: 2.0, delta: 0.2, inner: Inner::Simple }, move |s| {
            multi::full_estimator(&dist, 2.0, 0.2, Inner::Simple, VMode::IdealPhase, s, &cfg)
        }));
    }
    cases
}

/// Base ratio `cost/scale` at the first (smallest) grid point and the largest
/// ratio over the grid. Bounded growth means the latter stays within a constant
/// factor of the former.
fn ratio_growth(values: &[(f64, f64)]) -> (f64, f64) {
    let base = values[0].0 / values[0].1;
    (base, values.iter().map(|(c, s)| c / s).fold(0.0, f64::max))
}

#[test]
fn criterion_11_ledger_exactness() {
    let cfg = EstimatorConfig::default();
    let cases = sweep();
    let mut mismatches = Vec::new();
    for (i, c) in cases.iter().enumerate() {
        let measured = (c.run)(i as u64).unwrap_or_else(|e| panic!("case {i} {:?}: {e}", c.alg));
        let predicted = predict(&c.alg, &cfg).unwrap();
        if measured.experiment_accesses != predicted.experiment_accesses || measured != predicted {
            mismatches.push(format!("case {i} {:?}", c.alg));
        }
    }

    // Accesses of the constrained simple estimator against n·d^{1/4}·ln(d/δ).
    let mut simple = Vec::new();
    for d in [1usize, 2, 4, 16, 64] {
        for n in [2.0, 8.0, 64.0, 1024.0] {
            for delta in [1e-3, 0.01, 0.3] {
                let alg = Algorithm::ConstrainedSimple { d, n, sigma0: 1.0, eps0: notso_eps0(), delta };
                let cost = predict(&alg, &cfg).unwrap().experiment_accesses as f64;
                let df = d as f64;
                simple.push((cost, n * df.powf(0.25) * (df / delta).ln().max(1.0)));
            }
        }
    }
    // Registers of the meticulous estimator against ln n·ln ln n.
    let mut regs = Vec::new();
    for n in [4.0, 16.0, 64.0, 256.0, 1024.0, 4096.0] {
        let alg = Algorithm::ConstrainedMeticulous { d: 2, n, sigma0: 1.0, delta: 0.1 };
        let r = predict(&alg, &cfg).unwrap().registers_peak as f64;
        let ln = f64::ln(n);
        regs.push((r, ln * ln.ln()));
    }
    let (s_base, s_max) = ratio_growth(&simple);
    let (r_base, r_max) = ratio_growth(&regs);
    // Power-of-two rounding alone spans a factor 2; allow the lower-order log terms another 4.
    let bands_ok = s_max <= 8.0 * s_base && r_max <= 8.0 * r_base;
    let pass = mismatches.is_empty() && cases.len() == 50 && bands_ok;
    line(
        11,
        "ledger exactness",
        pass,
        &format!(
            "{} tuples, {} mismatches; simple accesses/(n d^¼ ln(d/δ)) max {:.2}× base, \
             meticulous registers/(ln n ln ln n) max {:.2}× base (≤ 8)",
            cases.len(),
            mismatches.len(),
            s_max / s_base,
            r_max / r_base
        ),
    );
    assert!(pass, "mismatches {mismatches:?}, growth ok {bands_ok}");
}

fn notso_eps0() -> f64 {
    multi::notso_eps0(EstimatorConfig::default().d_const, 1.0)
}

#[test]
fn criterion_12_full_pipeline() {
    let start = Instant::now();
    let cfg = EstimatorConfig::default();
    let dist = fixtures::bundled("d2_six").unwrap();
    let (n, delta, trials) = (4.0, 0.2, 100u64);
    let target = dist.covariance().trace().sqrt() / n;
    let mean = dist.mean();
    let (mut hits, mut quantile, mut truncation, mut rel) = (0, 0, 0, 0);
    for seed in 0..trials {
        let r = multi::full_estimator(&dist, n, delta, Inner::Meticulous, VMode::IdealPhase, seed, &cfg).unwrap();
        let c = r.certificates.as_ref().unwrap();
        hits += usize::from(linf(&r.estimate, &mean) <= target);
        quantile += usize::from(c.quantile_ok);
        truncation += usize::from(c.truncation_ok);
        rel += usize::from(c.rel_ok);
    }
    let t = trials as f64;
    let freq = hits as f64 / t;
    // Each stage runs at confidence δ/4.
    let stage_floor = frequency_floor(delta / 4.0, trials as usize);
    let stages_ok = [quantile, truncation, rel].iter().all(|&k| k as f64 / t >= stage_floor);
    let pass = freq >= frequency_floor(delta, trials as usize) && stages_ok;
    line(
        12,
        "full pipeline",
        pass,
        &format!(
            "success {freq:.2} (floor {:.3}); sub-certificates quantile {quantile}/{trials}, truncation {truncation}/{trials}, \
             relative error {rel}/{trials} (floor {stage_floor:.3} each); {:.1} s",
            frequency_floor(delta, trials as usize),
            start.elapsed().as_secs_f64()
        ),
    );
    assert!(pass);
}
