use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::FiniteDist;
use crate::sim::LatticeSpec;

/// Largest lattice the tail check enumerates.
pub const TAIL_ENUMERATION_CAP: u128 = 1 << 20;

/// Grid point where the empirical tail exceeds the bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailViolation {
    /// Threshold `t`.
    pub t: f64,
    /// A lattice point attaining `uᵀΣu = t`.
    pub u: Vec<f64>,
    /// `P_u[uᵀΣu ≥ t]`.
    pub empirical: f64,
    /// `2e^{−t/(D trΣ)}`.
    pub bound: f64,
}

/// Exhaustive comparison of `P_{u∼G}[Var⟨u,X⟩ ≥ t]` with `2e^{−t/(D trΣ)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCheckResult {
    /// Constant `D` under test.
    pub d_const: f64,
    /// `tr Σ`.
    pub trace: f64,
    /// Number of lattice points enumerated.
    pub points: usize,
    /// Distinct positive values of `uᵀΣu`, ascending.
    pub grid: Vec<f64>,
    /// Empirical tail at each grid point.
    pub empirical: Vec<f64>,
    /// Bound at each grid point.
    pub bound: Vec<f64>,
    /// Grid points where the bound fails.
    pub violations: Vec<TailViolation>,
    /// Smallest `D` for which this instance passes; `0` when `Σ = 0`.
    pub min_admissible_d: f64,
}

impl TailCheckResult {
    /// No violations.
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Enumerates every lattice point, computes `uᵀΣu` exactly and checks the
/// sub-exponential tail bound on the grid of attained values.
pub fn variance_tail_check(dist: &FiniteDist<f64>, lat: LatticeSpec, d_const: f64) -> Result<TailCheckResult> {
    if lat.dim() != dist.dim() {
        return Err(Error::pre(format!(
            "lattice dimension {} differs from distribution dimension {}",
            lat.dim(),
            dist.dim()
        )));
    }
    if !(d_const > 0.0) {
        return Err(Error::pre(format!("D = {d_const} must be positive")));
    }
    if lat.points() > TAIL_ENUMERATION_CAP {
        return Err(Error::Cap {
            what: "tail-check lattice enumeration".into(),
            needed: lat.points(),
            cap: TAIL_ENUMERATION_CAP,
        });
    }
    let cov = dist.covariance();
    let trace = cov.trace();
    let points = lat.points() as usize;
    let mut values: Vec<(f64, usize)> =
        (0..points).map(|i| (cov.quadratic_form(&lat.point::<f64>(i)).max(0.0), i)).collect();
    values.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut grid: Vec<(f64, usize)> = Vec::new();
    for &(v, i) in &values {
        if v <= 0.0 {
            continue;
        }
        match grid.last() {
            Some(&(g, _)) if v - g <= 1e-12 * g => {}
            _ => grid.push((v, i)),
        }
    }

    let n = points as f64;
    let mut out = TailCheckResult {
        d_const,
        trace,
        points,
        grid: Vec::with_capacity(grid.len()),
        empirical: Vec::with_capacity(grid.len()),
        bound: Vec::with_capacity(grid.len()),
        violations: Vec::new(),
        min_admissible_d: 0.0,
    };
    for &(t, i) in &grid {
        let cut = t * (1.0 - 1e-12);
        let below = values.partition_point(|&(v, _)| v < cut);
        let emp = (points - below) as f64 / n;
        let bound = 2.0 * (-t / (d_const * trace)).exp();
        out.min_admissible_d = out.min_admissible_d.max(t / (trace * (2.0 / emp).ln()));
        if emp > bound {
            out.violations.push(TailViolation { t, u: lat.point(i), empirical: emp, bound });
        }
        out.grid.push(t);
        out.empirical.push(emp);
        out.bound.push(bound);
    }
    Ok(out)
}
