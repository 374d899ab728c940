use std::path::Path;

use qmean::{fixtures, Error, EstimatorConfig, FiniteDist, Inner, Result, VMode};
use serde::Deserialize;

use crate::Common;

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub estimator: EstimatorConfig,
    pub dist: Option<String>,
    pub n: Option<f64>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub eps0: Option<f64>,
    pub sigma0: Option<f64>,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub inner: Option<Inner>,
    pub mode: Option<VMode>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Effective settings after flags override the file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub cfg: EstimatorConfig,
    pub dist: Option<String>,
    pub n: Option<f64>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub eps0: Option<f64>,
    pub sigma0: Option<f64>,
    pub p: Option<f64>,
    pub seed: u64,
    pub inner: Inner,
    pub mode: VMode,
}

impl Settings {
    pub fn merge(file: &FileConfig, flags: &Common) -> Result<Self> {
        let mut cfg = file.estimator;
        if let Some(d) = flags.d_const {
            cfg.d_const = d;
        }
        if let Some(c) = flags.c_const {
            cfg.c_const = c;
        }
        cfg.validate()?;
        Ok(Self {
            cfg,
            dist: flags.dist.clone().or_else(|| file.dist.clone()),
            n: flags.n.or(file.n),
            delta: flags.delta.or(file.delta),
            eps: flags.eps.or(file.eps),
            eps0: flags.eps0.or(file.eps0),
            sigma0: flags.sigma0.or(file.sigma0),
            p: file.p,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            inner: file.inner.unwrap_or(Inner::Meticulous),
            mode: file.mode.unwrap_or_default(),
        })
    }

    pub fn merge_estimate(
        file: &FileConfig,
        flags: &Common,
        inner: Option<&str>,
        mode: Option<&str>,
        p: Option<f64>,
    ) -> Result<Self> {
        let mut s = Self::merge(file, flags)?;
        if let Some(i) = inner {
            s.inner = i.parse()?;
        }
        if let Some(m) = mode {
            s.mode = m.parse()?;
        }
        s.p = p.or(s.p);
        Ok(s)
    }

    /// Distribution named by `--dist`: a JSON path or `bundled:<name>`.
    pub fn load_dist(&self) -> Result<FiniteDist> {
        let spec = self.dist.as_deref().ok_or_else(|| Error::Precondition("--dist is required".into()))?;
        match spec.strip_prefix("bundled:") {
            Some(name) => fixtures::bundled(name),
            None => FiniteDist::load(spec),
        }
    }

    pub fn require(&self, v: Option<f64>, name: &str) -> Result<f64> {
        v.ok_or_else(|| Error::Precondition(format!("--{name} is required")))
    }
}
