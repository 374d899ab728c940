use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;

/// Rejects values outside the open unit interval.
pub fn check_unit_interval(x: f64, name: &str) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::pre(format!("{name} = {x} must lie in (0, 1)")))
    }
}

/// Odd repetition count `2⌈(18 ln(1/δ) − 1)/2⌉ + 1` for median boosting.
pub fn median_boost_count(delta: f64) -> Result<usize> {
    check_unit_interval(delta, "δ")?;
    let half = ((18.0 * (1.0 / delta).ln() - 1.0) / 2.0).ceil().max(0.0);
    Ok(2 * half as usize + 1)
}

/// Median of a nonempty sample (upper median for even lengths).
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    let mid = values.len() / 2;
    let (_, m, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

/// Runs `runner(seed_i)` the boosted number of times with derived seeds and
/// returns the median. Runs execute in parallel; the result does not depend on
/// scheduling.
pub fn median_boost<F>(runner: F, delta: f64, seed: u64) -> Result<f64>
where
    F: Fn(u64) -> f64 + Sync,
{
    let m = median_boost_count(delta)?;
    let mut values: Vec<f64> = (0..m as u64).into_par_iter().map(|i| runner(rng::derive(seed, i))).collect();
    Ok(median(&mut values))
}

/// `2^⌈log₂ x⌉` for `x > 0`, exact at powers of two.
pub fn pow2_ceil(x: f64) -> Result<u64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::pre(format!("resolution target {x} is not a positive finite number")));
    }
    if x <= 1.0 {
        return Ok(1);
    }
    let mut k = x.log2().ceil() as i32;
    if k > 0 && 2f64.powi(k - 1) >= x {
        k -= 1;
    }
    if 2f64.powi(k) < x {
        k += 1;
    }
    if k > 52 {
        return Err(Error::Cap { what: "phase register resolution".into(), needed: 1u128 << k.min(127), cap: 1 << 52 });
    }
    Ok(1u64 << k)
}

/// `max(0, ⌈log₂ x⌉)` with a relative slack of `1e-12` against rounding in `x`.
pub fn ceil_log2_rounds(x: f64) -> usize {
    if !(x > 1.0) || !x.is_finite() {
        return 0;
    }
    (x.log2() - 1e-12).ceil().max(0.0) as usize
}

/// Confidence schedule `δ'_j = (6/π²)·δ/(T − j + 1)²`, `j = 1..T`.
pub fn loglog_deltas(t: usize, delta: f64) -> Vec<f64> {
    let c = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
    (1..=t).map(|j| c * delta / ((t - j + 1) as f64).powi(2)).collect()
}

/// Accuracy and confidence arrays of a geometric refinement chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    /// Number of steps `T`.
    pub t: usize,
    /// Contraction factor `R`.
    pub r: f64,
    /// Overall confidence `δ`.
    pub delta: f64,
    /// `ε'_j = ε·R^{T−j}`, strictly decreasing, `ε'_T = ε`.
    pub eps: Vec<f64>,
    /// `δ'_j`.
    pub deltas: Vec<f64>,
}

impl Schedule {
    /// `Σ δ'_j`; never exceeds `δ`.
    pub fn union_bound(&self) -> f64 {
        self.deltas.iter().sum()
    }

    /// `Σ (1/ε'_j) ln(1/δ'_j) / ((1/ε'_T) ln(1/δ))`.
    pub fn cost_ratio(&self) -> f64 {
        let last = self.eps[self.t - 1];
        let num: f64 = self.eps.iter().zip(&self.deltas).map(|(e, d)| (1.0 / d).ln() / e).sum();
        num / ((1.0 / last) * (1.0 / self.delta).ln())
    }
}

/// Geometric chain from `ε0` down to `ε` with ratio `R` and the log-log
/// confidence schedule. `T = ⌈log_R(ε0/ε)⌉`, so `ε'_1 < ε0 ≤ R·ε'_1`.
pub fn loglog_schedule(eps0: f64, eps: f64, r: f64, delta: f64) -> Result<Schedule> {
    check_unit_interval(delta, "δ")?;
    if !(eps > 0.0 && eps < eps0 && eps0.is_finite()) {
        return Err(Error::pre(format!("schedule needs 0 < ε < ε0, got ε = {eps}, ε0 = {eps0}")));
    }
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::pre(format!("contraction factor R = {r} must exceed 1")));
    }
    let t = (((eps0 / eps).ln() / r.ln()) - 1e-12).ceil().max(1.0) as usize;
    let eps_list = (1..=t).map(|j| eps * r.powi((t - j) as i32)).collect();
    Ok(Schedule { t, r, delta, eps: eps_list, deltas: loglog_deltas(t, delta) })
}

/// Limit of [`Schedule::cost_ratio`] as `T → ∞`, which bounds it for every
/// finite `T`: `Σ_{k≥0} R^{−k}·(1 + (ln(π²/6) + 2 ln(k+1)) / ln(1/δ))`. The
/// series is summed until its terms drop below `1e-15` of the running sum.
pub fn loglog_cost_bound(r: f64, delta: f64) -> Result<f64> {
    check_unit_interval(delta, "δ")?;
    if !(r > 1.0) {
        return Err(Error::pre(format!("contraction factor R = {r} must exceed 1")));
    }
    let l = (1.0 / delta).ln();
    let c = (std::f64::consts::PI * std::f64::consts::PI / 6.0).ln();
    let mut sum = 0.0;
    let mut k = 0u32;
    loop {
        let w = r.powi(-(k as i32));
        let term = w * (1.0 + (c + 2.0 * f64::from(k + 1).ln()) / l);
        sum += term;
        k += 1;
        // Terms are eventually decreasing; stop once negligible.
        if (term < 1e-15 * sum && k > 8) || k > 1_000_000 {
            break;
        }
    }
    Ok(sum)
}
