//! Finite probability spaces and the random variables defined on them.
//!
//! A [`FiniteDist`] is the ground truth for every computation in the crate:
//! moments and covariances are exact finite sums, and every derived variable
//! (projection, truncation, angle map, shift) is a new value map over the same
//! probability vector.

use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::{tol, Real};

/// One outcome of a finite distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome<T> {
    /// Probability of the outcome.
    pub p: T,
    /// Value vector of the outcome.
    pub x: Vec<T>,
}

/// Explicit finite distribution over vectors of dimension `dim`.
///
/// Invariants: at least one outcome, all `p ≥ 0`, `Σp = 1` within `1e-12`,
/// all values finite and of dimension `dim ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteDist<T> {
    dim: usize,
    outcomes: Vec<Outcome<T>>,
}

#[derive(Deserialize)]
struct RawDist {
    dim: usize,
    outcomes: Vec<Outcome<f64>>,
}

impl<T: Real> FiniteDist<T> {
    /// Validates and builds a distribution.
    pub fn new(dim: usize, outcomes: Vec<Outcome<T>>) -> Result<Self> {
        let invalid = |index: Option<usize>, reason: String| Error::InvalidDistribution { index, reason };
        if dim == 0 {
            return Err(invalid(None, "dimension must be at least 1".into()));
        }
        if outcomes.is_empty() {
            return Err(invalid(None, "no outcomes".into()));
        }
        let mut total = T::zero();
        for (k, o) in outcomes.iter().enumerate() {
            if !o.p.is_finite() || o.p < T::zero() {
                return Err(invalid(Some(k), format!("probability {} is not a finite nonnegative number", o.p)));
            }
            if o.x.len() != dim {
                return Err(invalid(Some(k), format!("value has dimension {}, expected {dim}", o.x.len())));
            }
            if let Some(a) = o.x.iter().position(|v| !v.is_finite()) {
                return Err(invalid(Some(k), format!("coordinate {a} is not finite")));
            }
            total += o.p;
        }
        if (total - T::one()).abs() > T::lit(tol::ALGEBRAIC).max(T::epsilon() * T::count(4 * outcomes.len())) {
            return Err(invalid(None, format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { dim, outcomes })
    }

    /// Builds from `(p, x)` pairs.
    pub fn from_pairs(pairs: &[(T, Vec<T>)]) -> Result<Self> {
        let dim = pairs.first().map(|(_, x)| x.len()).unwrap_or(0);
        Self::new(dim, pairs.iter().map(|(p, x)| Outcome { p: *p, x: x.clone() }).collect())
    }

    /// One-dimensional distribution from parallel slices.
    pub fn scalar(p: &[T], x: &[T]) -> Result<Self> {
        if p.len() != x.len() {
            return Err(Error::pre(format!("{} probabilities for {} values", p.len(), x.len())));
        }
        Self::new(1, p.iter().zip(x).map(|(&p, &x)| Outcome { p, x: vec![x] }).collect())
    }

    /// Point mass at `x`.
    pub fn point_mass(x: Vec<T>) -> Result<Self> {
        Self::new(x.len(), vec![Outcome { p: T::one(), x }])
    }

    /// Dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of outcomes `|Ω|`.
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    /// Always false; a distribution has at least one outcome.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Outcomes in index order.
    pub fn outcomes(&self) -> &[Outcome<T>] {
        &self.outcomes
    }

    /// Probability vector.
    pub fn probs(&self) -> Vec<T> {
        self.outcomes.iter().map(|o| o.p).collect()
    }

    /// Mean vector `E X`.
    pub fn mean(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.dim];
        for o in &self.outcomes {
            for (acc, &v) in m.iter_mut().zip(&o.x) {
                *acc += o.p * v;
            }
        }
        m
    }

    /// Exact covariance matrix.
    pub fn covariance(&self) -> CovSummary<T> {
        let d = self.dim;
        let mean = self.mean();
        let mut sigma = vec![T::zero(); d * d];
        for o in &self.outcomes {
            for a in 0..d {
                let da = o.x[a] - mean[a];
                for b in 0..d {
                    sigma[a * d + b] += o.p * da * (o.x[b] - mean[b]);
                }
            }
        }
        // Symmetrize to remove summation-order asymmetry.
        for a in 0..d {
            for b in (a + 1)..d {
                let s = (sigma[a * d + b] + sigma[b * d + a]) / T::lit(2.0);
                sigma[a * d + b] = s;
                sigma[b * d + a] = s;
            }
        }
        CovSummary::from_matrix(d, sigma)
    }

    /// Coordinate variable `X^α`.
    pub fn coordinate(&self, alpha: usize) -> Result<UniRv<T>> {
        if alpha >= self.dim {
            return Err(Error::pre(format!("coordinate {alpha} out of range for dimension {}", self.dim)));
        }
        Ok(UniRv::from_parts_unchecked(self.probs(), self.outcomes.iter().map(|o| o.x[alpha]).collect()))
    }

    /// Inner-product variable `⟨u, X⟩`.
    pub fn project(&self, u: &[T]) -> Result<UniRv<T>> {
        if u.len() != self.dim {
            return Err(Error::pre(format!("direction has dimension {}, expected {}", u.len(), self.dim)));
        }
        Ok(self.project_unchecked(u))
    }

    pub(crate) fn project_unchecked(&self, u: &[T]) -> UniRv<T> {
        let values =
            self.outcomes.iter().map(|o| o.x.iter().zip(u).fold(T::zero(), |acc, (&x, &w)| acc + x * w)).collect();
        UniRv::from_parts_unchecked(self.probs(), values)
    }

    /// Euclidean norm variable `‖X‖₂`.
    pub fn norm_rv(&self) -> UniRv<T> {
        let values = self.outcomes.iter().map(|o| euclid(&o.x)).collect();
        UniRv::from_parts_unchecked(self.probs(), values)
    }

    /// Multivariate truncation: vectors with `‖x‖₂ > K` become zero.
    pub fn truncate(&self, k: T) -> Result<Self> {
        if !(k >= T::zero()) {
            return Err(Error::pre(format!("truncation threshold {k} is negative")));
        }
        let outcomes = self
            .outcomes
            .iter()
            .map(|o| Outcome { p: o.p, x: if euclid(&o.x) > k { vec![T::zero(); self.dim] } else { o.x.clone() } })
            .collect();
        Ok(Self { dim: self.dim, outcomes })
    }

    /// Applies `x ↦ (x − shift) / scale` to every value.
    pub fn shift_scale(&self, shift: &[T], scale: T) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::pre("shift dimension mismatch"));
        }
        if !(scale > T::zero()) {
            return Err(Error::pre(format!("scale {scale} must be positive")));
        }
        let outcomes = self
            .outcomes
            .iter()
            .map(|o| Outcome { p: o.p, x: o.x.iter().zip(shift).map(|(&x, &s)| (x - s) / scale).collect() })
            .collect();
        Ok(Self { dim: self.dim, outcomes })
    }

    /// Exact `E ‖X‖₂²`.
    pub fn second_moment_norm(&self) -> T {
        self.outcomes.iter().map(|o| o.p * o.x.iter().map(|&v| v * v).sum::<T>()).sum()
    }
}

impl FiniteDist<f64> {
    /// Parses the JSON schema `{"dim": d, "outcomes": [{"p": f, "x": [..]}, ..]}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawDist = serde_json::from_str(s)?;
        Self::new(raw.dim, raw.outcomes)
    }

    /// Loads a distribution file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Serializes to the distribution JSON schema.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("distribution serializes")
    }
}

fn euclid<T: Real>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).sum::<T>().sqrt()
}

/// Scalar random variable: one value per outcome of a finite distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct UniRv<T> {
    p: Vec<T>,
    x: Vec<T>,
}

impl<T: Real> UniRv<T> {
    /// Builds a variable from probabilities and values; validates like [`FiniteDist::new`].
    pub fn new(p: Vec<T>, x: Vec<T>) -> Result<Self> {
        FiniteDist::scalar(&p, &x)?;
        Ok(Self { p, x })
    }

    pub(crate) fn from_parts_unchecked(p: Vec<T>, x: Vec<T>) -> Self {
        debug_assert_eq!(p.len(), x.len());
        Self { p, x }
    }

    /// Constant variable on a single outcome.
    pub fn constant(c: T) -> Self {
        Self { p: vec![T::one()], x: vec![c] }
    }

    /// Number of outcomes.
    pub fn len(&self) -> usize {
        self.p.len()
    }

    /// Always false.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Probabilities.
    pub fn probs(&self) -> &[T] {
        &self.p
    }

    /// Values.
    pub fn values(&self) -> &[T] {
        &self.x
    }

    /// Mean, variance and second moment.
    pub fn moments(&self) -> ScalarStats<T> {
        let mean: T = self.p.iter().zip(&self.x).map(|(&p, &x)| p * x).sum();
        let variance: T = self.p.iter().zip(&self.x).map(|(&p, &x)| p * (x - mean) * (x - mean)).sum();
        let second: T = self.p.iter().zip(&self.x).map(|(&p, &x)| p * x * x).sum();
        ScalarStats { mean, variance, second_moment: second }
    }

    /// Expectation of `f(X)`.
    pub fn expect(&self, f: impl Fn(T) -> T) -> T {
        self.p.iter().zip(&self.x).map(|(&p, &x)| p * f(x)).sum()
    }

    /// Pointwise value map (post-processing).
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { p: self.p.clone(), x: self.x.iter().map(|&v| f(v)).collect() }
    }

    /// Univariate truncation: clamps values to `[−K, K]`.
    pub fn truncate(&self, k: T) -> Result<Self> {
        if !(k >= T::zero()) {
            return Err(Error::pre(format!("truncation threshold {k} is negative")));
        }
        Ok(self.map(|v| v.max(-k).min(k)))
    }

    /// Angle map `θ = 2·arctan(½·clamp(X, ±1/(λε)))`.
    pub fn to_angle(&self, lambda: T, eps: T) -> Result<Self> {
        if !(lambda > T::zero()) || !(eps > T::zero()) {
            return Err(Error::pre(format!("angle map needs λ > 0 and ε > 0, got λ = {lambda}, ε = {eps}")));
        }
        let k = T::one() / (lambda * eps);
        let half = T::lit(0.5);
        Ok(self.map(|v| T::lit(2.0) * (half * v.max(-k).min(k)).atan()))
    }

    /// Probability of `X ≥ y`.
    pub fn tail_at_least(&self, y: T) -> T {
        self.p.iter().zip(&self.x).filter(|(_, &x)| x >= y).map(|(&p, _)| p).sum()
    }

    /// Upper quantile `Q(q) = sup{y : P[X ≥ y] ≥ q}`; an atom of the distribution.
    pub fn upper_quantile(&self, q: T) -> T {
        let slack = T::lit(tol::ALGEBRAIC);
        let mut best = T::neg_infinity();
        for (&v, &p) in self.x.iter().zip(&self.p) {
            if p > T::zero() && v > best && self.tail_at_least(v) >= q - slack {
                best = v;
            }
        }
        best
    }
}

impl UniRv<f64> {
    /// Cumulative sampler over outcome indices.
    pub fn sampler(&self) -> IndexSampler {
        IndexSampler::new(&self.p)
    }
}

/// Inverse-CDF sampler over a fixed probability vector.
#[derive(Debug, Clone)]
pub struct IndexSampler {
    cdf: Vec<f64>,
}

impl IndexSampler {
    /// Builds from nonnegative weights (normalized internally).
    pub fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|&w| {
                acc += w.max(0.0);
                acc
            })
            .collect();
        if acc > 0.0 {
            for c in &mut cdf {
                *c /= acc;
            }
        }
        Self { cdf }
    }

    /// Draws one index.
    pub fn draw(&self, rng: &mut Rng) -> usize {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c <= u);
        // Skip zero-width cells at the end produced by rounding.
        i.min(self.cdf.len() - 1)
    }
}

/// Mean, variance and second moment of a scalar variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarStats<T> {
    /// `E X`.
    pub mean: T,
    /// `E (X − E X)²`.
    pub variance: T,
    /// `E X²`.
    pub second_moment: T,
}

/// Covariance matrix with its trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovSummary<T> {
    dim: usize,
    matrix: Vec<T>,
    trace: T,
}

impl<T: Real> CovSummary<T> {
    fn from_matrix(dim: usize, matrix: Vec<T>) -> Self {
        let trace = (0..dim).map(|a| matrix[a * dim + a]).sum();
        Self { dim, matrix, trace }
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry `Σ^{αβ}`.
    pub fn get(&self, a: usize, b: usize) -> T {
        self.matrix[a * self.dim + b]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[T] {
        &self.matrix
    }

    /// `tr Σ`.
    pub fn trace(&self) -> T {
        self.trace
    }

    /// Quadratic form `uᵀΣu`.
    pub fn quadratic_form(&self, u: &[T]) -> T {
        let d = self.dim;
        let mut acc = T::zero();
        for a in 0..d {
            for b in 0..d {
                acc += u[a] * self.matrix[a * d + b] * u[b];
            }
        }
        acc
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim;
        let m = nalgebra::DMatrix::from_fn(d, d, |i, j| self.get(i, j).to_f64_lossy());
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Symmetric within `1e-10` and no eigenvalue below `−1e-10`.
    pub fn is_psd(&self) -> bool {
        let d = self.dim;
        let symmetric = (0..d).all(|a| (0..d).all(|b| (self.get(a, b) - self.get(b, a)).abs() <= T::lit(tol::NORM)));
        symmetric && self.eigenvalues().first().is_none_or(|&l| l >= -tol::NORM)
    }
}
