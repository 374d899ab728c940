use qmean::{rng, Error, Result};

use crate::config::Settings;
use crate::run::{linf, predicted_calls, run_multi};

/// `key=v1,v2,..` with key `n` or `delta`.
fn parse_sweep(spec: &str) -> Result<(String, Vec<f64>)> {
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| Error::Precondition(format!("sweep `{spec}` is not of the form key=v1,v2,..")))?;
    let key = key.trim().to_string();
    if key != "n" && key != "delta" {
        return Err(Error::Precondition(format!("sweep key `{key}` must be n or delta")));
    }
    let values = values
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Precondition(format!("sweep value `{v}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok((key, values))
}

/// CSV rows `n, d, delta, trial, seed, linf_error, target, success, oracle_calls, predicted_calls`.
pub fn run(base: &Settings, alg: &str, sweep: Option<&str>, trials: usize) -> Result<String> {
    let mut s = base.clone();
    if s.dist.is_none() {
        s.dist = Some("bundled:d2_six".into());
    }
    s.delta = s.delta.or(Some(0.2));
    s.n = s.n.or(Some(4.0));
    let dist = s.load_dist()?;
    let mean = dist.mean();
    let root_tr = dist.covariance().trace().sqrt();
    let (key, values) = match sweep {
        Some(spec) => parse_sweep(spec)?,
        None => ("n".to_string(), vec![s.n.unwrap_or(4.0)]),
    };

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "n",
        "d",
        "delta",
        "trial",
        "seed",
        "linf_error",
        "target",
        "success",
        "oracle_calls",
        "predicted_calls",
    ])
    .map_err(csv_err)?;
    for (vi, &v) in values.iter().enumerate() {
        let mut point = s.clone();
        match key.as_str() {
            "n" => point.n = Some(v),
            _ => point.delta = Some(v),
        }
        let n = point.require(point.n, "n")?;
        let target = match (alg, point.sigma0) {
            ("full", _) | (_, None) => root_tr / n,
            (_, Some(sigma0)) => sigma0 / n,
        };
        let predicted = predicted_calls(&point, alg, dist.dim())?;
        for t in 0..trials {
            let seed = rng::derive(point.seed, (vi * trials + t) as u64);
            let report = run_multi(&point, alg, &dist, seed)?;
            let err = linf(&report.estimate, &mean);
            w.write_record([
                n.to_string(),
                dist.dim().to_string(),
                point.delta.unwrap_or_default().to_string(),
                t.to_string(),
                seed.to_string(),
                format!("{err:.6e}"),
                format!("{target:.6e}"),
                (err <= target).to_string(),
                report.oracle_calls.to_string(),
                predicted.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
        .map_err(|e| Error::Precondition(e.to_string()))?;
    Ok(format!(
        "# qmean-cli {} algorithm={alg} dist={} inner={} mode={}\n{body}",
        env!("CARGO_PKG_VERSION"),
        s.dist.as_deref().unwrap_or_default(),
        s.inner,
        s.mode
    ))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
