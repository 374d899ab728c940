use qmean::multi::{self, MultiEstimateReport};
use qmean::phase::{lattice_readout, multidim_state, noise_injection, phase_estimate_1d};
use qmean::spectrum::{certify_key_property, full_spectrum, key_lambda, principal_alpha, SolutionKind};
use qmean::uni::{self, refine_s0};
use qmean::{
    predict, Algorithm, AlgorithmParams, Complex64, CostReport, Error, EstimateReport, GroverOperator, LatticeSpec,
    NoiseMode, PEConfig, Result, SpectrumCertificate, StateVector, UniRv,
};
use serde::Serialize;

use crate::config::Settings;

fn angles(s: &Settings, rv: &UniRv, s0: Option<f64>) -> Result<UniRv> {
    match s.eps {
        Some(eps) => rv.to_angle(key_lambda(s0.unwrap_or_else(refine_s0)), eps),
        None => Ok(rv.clone()),
    }
}

#[derive(Serialize)]
pub struct Eigen {
    alpha: f64,
    overlap: f64,
    kind: SolutionKind,
    residual: f64,
}

#[derive(Serialize)]
pub struct SpectrumOut {
    outcomes: usize,
    eigen: Vec<Eigen>,
    overlap_sum: f64,
    certificate: Option<SpectrumCertificate>,
}

pub fn spectrum(s: &Settings, coord: usize, s0: Option<f64>) -> Result<SpectrumOut> {
    let rv = s.load_dist()?.coordinate(coord)?;
    let theta = angles(s, &rv, s0)?;
    let g = GroverOperator::new(&theta)?;
    let eigen: Vec<Eigen> = full_spectrum(&theta)?
        .iter()
        .map(|sol| Eigen { alpha: sol.alpha, overlap: sol.overlap, kind: sol.kind, residual: g.residual(sol) })
        .collect();
    let certificate = match (s.eps, s0) {
        (Some(eps), Some(s0)) => Some(certify_key_property(&rv, eps, s0)?.0),
        _ => None,
    };
    Ok(SpectrumOut { outcomes: theta.len(), overlap_sum: eigen.iter().map(|e| e.overlap).sum(), eigen, certificate })
}

#[derive(Serialize)]
pub struct Pe1dOut {
    resolution: usize,
    kappa: u32,
    principal_alpha: f64,
    target_fraction: f64,
    mode_fraction: f64,
    window_mass: f64,
    success_factor: f64,
    total: f64,
}

pub fn pe1d(s: &Settings, coord: usize, resolution: usize, kappa: u32, s0: Option<f64>) -> Result<Pe1dOut> {
    let rv = s.load_dist()?.coordinate(coord)?;
    let theta = angles(s, &rv, s0)?;
    let g = GroverOperator::new(&theta)?;
    let cfg = PEConfig::new(resolution, kappa)?;
    let input = StateVector::synthesizer_state(theta.probs())?;
    let out = phase_estimate_1d(g.matrix(), &input, cfg)?;
    let alpha = principal_alpha(&theta)?;
    let target = alpha / std::f64::consts::TAU;
    Ok(Pe1dOut {
        resolution,
        kappa,
        principal_alpha: alpha,
        target_fraction: target,
        mode_fraction: out.mode()[0],
        window_mass: out.window_mass(0, target, kappa),
        success_factor: cfg.success_factor(),
        total: out.total(),
    })
}

#[derive(Serialize)]
pub struct PemdOut {
    resolution: usize,
    kappa: u32,
    target: Vec<f64>,
    noise: f64,
    failure_mass: Vec<f64>,
    bound: f64,
    within_bound: bool,
}

pub fn pemd(s: &Settings, resolution: usize, kappa: u32, noise: Option<f64>, mode: &str) -> Result<PemdOut> {
    let dist = s.load_dist()?;
    let x = dist.mean();
    if let Some(v) = x.iter().find(|v| v.is_nan() || v.abs() >= 0.5) {
        return Err(Error::Precondition(format!("mean coordinate {v} outside (−1/2, 1/2)")));
    }
    let cfg = PEConfig::new(resolution, kappa)?;
    let lat = LatticeSpec::new(dist.dim(), resolution)?;
    let init = StateVector::outcome_state(vec![Complex64::new(1.0, 0.0)])?;
    let mut state = multidim_state(qmean::phase::exact_phase_family(x.clone()), lat, &init, resolution as u64)?;
    let eps = noise.unwrap_or(0.0);
    if eps > 0.0 {
        let mode: NoiseMode = serde_json::from_value(serde_json::Value::String(mode.into()))?;
        state = noise_injection(&state, eps, mode, s.seed)?;
    }
    let table = lattice_readout(&state)?;
    let failure_mass: Vec<f64> = (0..dist.dim()).map(|a| table.failure_mass(a, x[a], kappa)).collect();
    let bound = (1.0 - cfg.success_factor()) + 2.0 * eps;
    Ok(PemdOut {
        resolution,
        kappa,
        within_bound: failure_mass.iter().all(|&f| f <= bound + 1e-12),
        target: x,
        noise: eps,
        failure_mass,
        bound,
    })
}

fn params(s: &Settings, d: usize) -> AlgorithmParams {
    AlgorithmParams {
        n: s.n,
        delta: s.delta,
        eps: s.eps,
        eps0: s.eps0,
        sigma0: s.sigma0,
        d: Some(d),
        p: s.p,
        inner: Some(s.inner),
    }
}

#[derive(Serialize)]
pub struct UniOut {
    algorithm: String,
    report: EstimateReport,
    predicted: CostReport,
    true_mean: f64,
    abs_error: f64,
}

pub fn estimate_uni(s: &Settings, alg: &str, coord: usize) -> Result<UniOut> {
    let dist = s.load_dist()?;
    let rv = dist.coordinate(coord)?;
    let predicted = predict(&Algorithm::from_id(alg, &params(s, 1))?, &s.cfg)?;
    let delta = s.require(s.delta, "delta")?;
    let report = match alg {
        "refine-uni" => uni::refine_uni(&rv, s.require(s.eps, "eps")?, delta, s.seed, &s.cfg)?,
        "constrained-uni" => uni::constrained_uni(
            &rv,
            s.require(s.sigma0, "sigma0")?,
            s.require(s.eps0, "eps0")?,
            s.require(s.n, "n")?,
            delta,
            s.seed,
            &s.cfg,
        )?,
        "median-of-means" => uni::median_of_means_rv(&rv, s.require(s.n, "n")?, delta, s.seed)?,
        "notso-uni" => {
            uni::notso_uni(&rv, s.require(s.sigma0, "sigma0")?, s.require(s.n, "n")?, delta, s.seed, &s.cfg)?
        }
        "bounded-rel" => uni::bounded_rel_estimator(&rv, s.require(s.n, "n")?, delta, s.seed, &s.cfg)?,
        "quantile" => multi::quantile_estimate(&rv, s.require(s.p, "p")?, delta, s.seed, &s.cfg)?,
        other => return Err(Error::UnknownAlgorithm(format!("{other} (univariate)"))),
    };
    let true_mean = rv.moments().mean;
    Ok(UniOut { algorithm: alg.into(), abs_error: (report.estimate - true_mean).abs(), report, predicted, true_mean })
}

#[derive(Serialize)]
pub struct MultiOut {
    algorithm: String,
    report: MultiEstimateReport,
    predicted: CostReport,
    true_mean: Vec<f64>,
    linf_error: f64,
}

pub fn run_multi(s: &Settings, alg: &str, dist: &qmean::FiniteDist, seed: u64) -> Result<MultiEstimateReport> {
    let delta = s.require(s.delta, "delta")?;
    let cfg = &s.cfg;
    match alg {
        "refine-multi" => multi::refine_multi(dist, s.require(s.eps, "eps")?, delta, seed, cfg),
        "constrained-simple" => multi::constrained_simple(
            dist,
            s.require(s.n, "n")?,
            s.require(s.sigma0, "sigma0")?,
            s.require(s.eps0, "eps0")?,
            delta,
            seed,
            cfg,
        ),
        "constrained-meticulous" => multi::constrained_meticulous(
            dist,
            s.require(s.n, "n")?,
            s.require(s.sigma0, "sigma0")?,
            delta,
            s.mode,
            seed,
            cfg,
        ),
        "classical-multi" => multi::classical_multi(dist, s.require(s.n, "n")?, delta, seed),
        "notso-multi" => multi::notso_multi(
            dist,
            s.require(s.n, "n")?,
            s.require(s.sigma0, "sigma0")?,
            delta,
            s.inner,
            s.mode,
            seed,
            cfg,
        ),
        "full" => multi::full_estimator(dist, s.require(s.n, "n")?, delta, s.inner, s.mode, seed, cfg),
        other => Err(Error::UnknownAlgorithm(format!("{other} (multivariate)"))),
    }
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn estimate_multi(s: &Settings, alg: &str) -> Result<MultiOut> {
    let dist = s.load_dist()?;
    let predicted = predict(&Algorithm::from_id(alg, &params(s, dist.dim()))?, &s.cfg)?;
    let report = run_multi(s, alg, &dist, s.seed)?;
    let true_mean = dist.mean();
    Ok(MultiOut { algorithm: alg.into(), linf_error: linf(&report.estimate, &true_mean), report, predicted, true_mean })
}

pub fn predicted_calls(s: &Settings, alg: &str, d: usize) -> Result<u64> {
    Ok(predict(&Algorithm::from_id(alg, &params(s, d))?, &s.cfg)?.experiment_accesses)
}
