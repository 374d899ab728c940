use qmean::multi::{full_estimator, variance_tail_check};
use qmean::spectrum::full_spectrum;
use qmean::uni::notso_uni;
use qmean::{fixtures, predict, Algorithm, FiniteDist, GroverOperator, Inner, LatticeSpec, Result, VMode};
use serde::Serialize;

use crate::config::Settings;

#[derive(Debug, Serialize)]
pub struct Check {
    pub dist: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Verdict {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Verdict {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

fn push(out: &mut Vec<Check>, dist: &str, name: &str, r: Result<(bool, String)>) {
    let (passed, detail) = r.unwrap_or_else(|e| (false, e.to_string()));
    out.push(Check { dist: dist.into(), name: name.into(), passed, detail });
}

fn checks_for(label: &str, dist: &FiniteDist, s: &Settings, out: &mut Vec<Check>) {
    let cov = dist.covariance();
    push(out, label, "covariance-psd", Ok((cov.is_psd(), format!("eigenvalues {:?}", cov.eigenvalues()))));

    push(
        out,
        label,
        "tail-lemma",
        LatticeSpec::new(dist.dim(), 8).and_then(|lat| variance_tail_check(dist, lat, s.cfg.d_const)).map(|t| {
            (
                t.passed(),
                format!(
                    "{} grid points, {} violations, min admissible D {:.4}",
                    t.grid.len(),
                    t.violations.len(),
                    t.min_admissible_d
                ),
            )
        }),
    );

    push(
        out,
        label,
        "spectrum",
        dist.coordinate(0).and_then(|theta| {
            let g = GroverOperator::new(&theta)?;
            let sols = full_spectrum(&theta)?;
            let residual = sols.iter().map(|sol| g.residual(sol)).fold(0.0, f64::max);
            let overlap: f64 = sols.iter().map(|sol| sol.overlap).sum();
            let ok = sols.len() == theta.len() && residual <= 1e-9 && (overlap - 1.0).abs() <= 1e-10;
            Ok((ok, format!("{} eigenpairs, max residual {residual:.3e}, overlap sum {overlap:.12}", sols.len())))
        }),
    );

    if dist.dim() == 1 {
        push(
            out,
            label,
            "ledger-notso-uni",
            dist.coordinate(0).and_then(|rv| {
                let sigma0 = rv.moments().variance.sqrt().max(1e-3);
                let r = notso_uni(&rv, sigma0, 4.0, 0.1, s.seed, &s.cfg)?;
                let p = predict(&Algorithm::NotsoUni { n: 4.0, sigma0, delta: 0.1 }, &s.cfg)?;
                Ok((p == r.cost, format!("predicted {} measured {}", p.experiment_accesses, r.oracle_calls)))
            }),
        );
    } else if dist.dim() == 2 {
        push(
            out,
            label,
            "ledger-full",
            (|| {
                let r = full_estimator(dist, 2.0, 0.2, Inner::Meticulous, VMode::IdealPhase, s.seed, &s.cfg)?;
                let again = full_estimator(dist, 2.0, 0.2, Inner::Meticulous, VMode::IdealPhase, s.seed, &s.cfg)?;
                let p = predict(&Algorithm::Full { d: 2, n: 2.0, delta: 0.2, inner: Inner::Meticulous }, &s.cfg)?;
                let certs = r.certificates.as_ref().is_some_and(|c| c.all_hold());
                Ok((
                    p.experiment_accesses == r.oracle_calls && r.estimate == again.estimate && certs,
                    format!(
                        "predicted {} measured {}, deterministic {}, stage certificates {}",
                        p.experiment_accesses,
                        r.oracle_calls,
                        r.estimate == again.estimate,
                        certs
                    ),
                ))
            })(),
        );
    }
}

pub fn run(s: &Settings) -> Result<Verdict> {
    let mut checks = Vec::new();
    match &s.dist {
        Some(name) => checks_for(name, &s.load_dist()?, s, &mut checks),
        None => {
            for (name, _) in fixtures::BUNDLED {
                checks_for(name, &fixtures::bundled(name)?, s, &mut checks);
            }
        }
    }
    Ok(Verdict { passed: checks.iter().all(|c| c.passed), checks })
}
