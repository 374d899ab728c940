//! One-dimensional and multidimensional phase estimation with exact outcome
//! tables.
//!
//! Phase fractions are reported in `[−1/2, 1/2)`; success windows use the
//! circular distance on the unit circle of fractions.

use num_complex::Complex;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::prob::IndexSampler;
use crate::rng::{self, Rng};
use crate::scalar::{tol, Real};
use crate::sim::{check_cap, LatticeSpec, Layout, Register, StateVector};

/// Resolution and window parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PEConfig {
    /// Register size `N` (a power of two).
    pub n: usize,
    /// Window half-width in units of `1/N`; at least 2.
    pub kappa: u32,
}

impl PEConfig {
    /// Validated configuration.
    pub fn new(n: usize, kappa: u32) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::pre(format!("phase register size {n} is not a power of two")));
        }
        if kappa < 2 {
            return Err(Error::pre(format!("κ = {kappa} must be at least 2")));
        }
        Ok(Self { n, kappa })
    }

    /// Guaranteed success factor `1 − 1/(2(κ−1))`.
    pub fn success_factor(&self) -> f64 {
        1.0 - 1.0 / (2.0 * (self.kappa as f64 - 1.0))
    }
}

/// Circular distance between two fractions, in `[0, 1/2]`.
pub fn circular_distance<T: Real>(a: T, b: T) -> T {
    let d = (a - b).abs();
    let d = d - d.floor();
    d.min(T::one() - d)
}

/// Fraction in `[−1/2, 1/2)` encoded by index `m` of an `N`-level register.
pub fn index_fraction<T: Real>(m: usize, n: usize) -> T {
    let (m, n) = (m as f64, n as f64);
    T::lit(if 2.0 * m >= n { m / n - 1.0 } else { m / n })
}

/// Exact outcome table of (multidimensional) phase estimation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PEOutcome<T> {
    dims: usize,
    n: usize,
    table: Vec<T>,
}

impl<T: Real> PEOutcome<T> {
    pub(crate) fn from_table(dims: usize, n: usize, table: Vec<T>) -> Self {
        Self { dims, n, table }
    }

    /// Number of estimated dimensions.
    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Register size per dimension.
    pub fn resolution(&self) -> usize {
        self.n
    }

    /// Row-major probability table over `N^dims` outcomes.
    pub fn table(&self) -> &[T] {
        &self.table
    }

    /// Total probability.
    pub fn total(&self) -> T {
        self.table.iter().copied().sum()
    }

    /// Per-dimension fractions of a flat outcome index.
    pub fn fractions(&self, mut flat: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.dims];
        for a in (0..self.dims).rev() {
            out[a] = index_fraction(flat % self.n, self.n);
            flat /= self.n;
        }
        out
    }

    /// Marginal table of one dimension.
    pub fn marginal(&self, axis: usize) -> Vec<T> {
        let stride = self.n.pow((self.dims - 1 - axis) as u32);
        let mut out = vec![T::zero(); self.n];
        for (flat, &p) in self.table.iter().enumerate() {
            out[(flat / stride) % self.n] += p;
        }
        out
    }

    /// `P[|x^axis − target|_circ ≤ κ/N]`.
    pub fn window_mass(&self, axis: usize, target: T, kappa: u32) -> T {
        let w = T::lit(kappa as f64) / T::count(self.n);
        let slack = T::lit(tol::ALGEBRAIC);
        self.marginal(axis)
            .iter()
            .enumerate()
            .filter(|(m, _)| circular_distance(index_fraction::<T>(*m, self.n), target) <= w + slack)
            .map(|(_, &p)| p)
            .sum()
    }

    /// `P[|x^axis − target|_circ > κ/N]`, summed directly.
    pub fn failure_mass(&self, axis: usize, target: T, kappa: u32) -> T {
        let w = T::lit(kappa as f64) / T::count(self.n);
        let slack = T::lit(tol::ALGEBRAIC);
        self.marginal(axis)
            .iter()
            .enumerate()
            .filter(|(m, _)| circular_distance(index_fraction::<T>(*m, self.n), target) > w + slack)
            .map(|(_, &p)| p)
            .sum()
    }

    /// Most likely outcome, as fractions.
    pub fn mode(&self) -> Vec<T> {
        let best = self
            .table
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc });
        self.fractions(best.0)
    }

    /// `trials` flat outcome indices.
    pub fn sample_with(&self, rng: &mut Rng, trials: usize) -> Vec<usize> {
        let w: Vec<f64> = self.table.iter().map(|p| p.to_f64_lossy()).collect();
        let s = IndexSampler::new(&w);
        (0..trials).map(|_| s.draw(rng)).collect()
    }
}

/// Textbook phase estimation of `unitary` on `input` with `N` controlled powers.
///
/// The register state `N^{-1/2} Σ_t |t⟩ U^t|ψ⟩` is built explicitly and the
/// register is inverse-Fourier transformed, so no eigendecomposition is used.
pub fn phase_estimate_1d<T: Real>(unitary: &CMatrix<T>, input: &StateVector<T>, cfg: PEConfig) -> Result<PEOutcome<T>> {
    let layout = input.layout();
    if layout.lattice().is_some() || layout.junk().is_some() {
        return Err(Error::Layout("input must live on the outcome register only".into()));
    }
    let k = layout.outcome();
    if unitary.order() != k {
        return Err(Error::Layout(format!("unitary of order {} for {k} outcomes", unitary.order())));
    }
    let defect = unitary.unitarity_defect();
    if !(defect <= T::lit(tol::NORM).max(T::epsilon().sqrt() * T::lit(4.0))) {
        return Err(Error::NonUnitary { index: 0, deviation: defect.to_f64_lossy() });
    }
    let n = cfg.n;
    check_cap("phase register ⊗ outcome register", n as u128 * k as u128)?;
    let mut lines = vec![Complex::new(T::zero(), T::zero()); k * n];
    let mut v = input.amplitudes().to_vec();
    let mut next = v.clone();
    for t in 0..n {
        for (i, z) in v.iter().enumerate() {
            lines[i * n + t] = *z;
        }
        unitary.mul_vec_into(&v, &mut next);
        std::mem::swap(&mut v, &mut next);
    }
    let fft = rustfft::FftPlanner::<T>::new().plan_fft_forward(n);
    let scale = T::one() / T::count(n);
    let mut table = vec![T::zero(); n];
    for line in lines.chunks_mut(n) {
        fft.process(line);
        for (m, z) in line.iter().enumerate() {
            table[m] += (*z * scale).norm_sqr();
        }
    }
    Ok(PEOutcome::from_table(1, n, table))
}

/// `|N^{-1} Σ_t e^{2πi t δ}|²` for a fraction offset `δ`.
pub fn fejer_weight<T: Real>(n: usize, delta: T) -> T {
    let half_angle = T::PI() * delta;
    let s = half_angle.sin();
    if s.abs() <= T::epsilon() {
        return T::one();
    }
    let num = (T::count(n) * half_angle).sin();
    (num * num) / (T::count(n * n) * s * s)
}

/// Exact table of phase estimation on a state with eigen-components
/// `(α_j, w_j)`: `P(m) = Σ_j w_j F_N(α_j/2π − m/N)`.
pub fn pe_from_components<T: Real>(components: &[(T, T)], n: usize) -> Result<PEOutcome<T>> {
    check_cap("phase register", n as u128)?;
    let mut table = vec![T::zero(); n];
    for &(alpha, w) in components {
        let frac = alpha / T::TAU();
        for (m, slot) in table.iter_mut().enumerate() {
            *slot += w * fejer_weight(n, frac - T::count(m) / T::count(n));
        }
    }
    Ok(PEOutcome::from_table(1, n, table))
}

/// Exact sampler for 1-D phase estimation given eigen-components; never
/// materializes the `N`-entry table.
#[derive(Debug, Clone)]
pub struct PhaseSampler {
    n: usize,
    fracs: Vec<f64>,
    pick: IndexSampler,
}

impl PhaseSampler {
    /// Components `(α_j, w_j)`; weights are normalized.
    pub fn new(components: &[(f64, f64)], n: usize) -> Self {
        let fracs = components.iter().map(|c| c.0 / std::f64::consts::TAU).collect();
        let w: Vec<f64> = components.iter().map(|c| c.1).collect();
        Self { n, fracs, pick: IndexSampler::new(&w) }
    }

    /// Register size.
    pub fn resolution(&self) -> usize {
        self.n
    }

    /// Draws a measured index `m ∈ {0..N−1}`.
    pub fn draw_index(&self, rng: &mut Rng) -> usize {
        let n = self.n;
        let x = self.fracs[self.pick.draw(rng)] * n as f64;
        let base = x.floor();
        let f = x - base;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut r: i64 = 0;
        for step in 0..n {
            // Offsets visited in the order 0, 1, −1, 2, −2, ...
            r = if step == 0 {
                0
            } else if step % 2 == 1 {
                step.div_ceil(2) as i64
            } else {
                -((step / 2) as i64)
            };
            acc += fejer_weight(n, (f - r as f64) / n as f64);
            if u < acc {
                break;
            }
        }
        (base as i64 + r).rem_euclid(n as i64) as usize
    }

    /// Draws a phase fraction in `[−1/2, 1/2)`.
    pub fn draw(&self, rng: &mut Rng) -> f64 {
        index_fraction(self.draw_index(rng), self.n)
    }
}

/// Uniform lattice state with `family(u)^power` applied per lattice point.
pub fn multidim_state<T, F>(family: F, lat: LatticeSpec, init: &StateVector<T>, power: u64) -> Result<StateVector<T>>
where
    T: Real,
    F: Fn(usize, &[T]) -> CMatrix<T> + Sync,
{
    check_cap("lattice ⊗ outcome state", lat.points() * init.layout().outcome() as u128)?;
    let mut state = StateVector::uniform_lattice_state(lat, init)?;
    state.apply_per_lattice_unitary(family, power)?;
    Ok(state)
}

/// Inverse QFT on the lattice axes and the exact joint table of the axes.
pub fn lattice_readout<T: Real>(state: &StateVector<T>) -> Result<PEOutcome<T>> {
    let lat = state.layout().lattice().ok_or_else(|| Error::Layout("readout needs a lattice".into()))?;
    let mut s = state.clone();
    s.inverse_qft_lattice()?;
    let axes: Vec<Register> = (0..lat.dim()).map(Register::Axis).collect();
    let dist = s.measure_distribution(&axes)?;
    Ok(PEOutcome::from_table(lat.dim(), lat.resolution(), dist.probs().to_vec()))
}

/// Multidimensional phase estimation: uniform lattice superposition, per-point
/// `family(u)^power`, per-axis inverse QFT, readout of all axes.
pub fn multidim_phase_estimate<T, F>(
    family: F,
    lat: LatticeSpec,
    init: &StateVector<T>,
    power: u64,
) -> Result<PEOutcome<T>>
where
    T: Real,
    F: Fn(usize, &[T]) -> CMatrix<T> + Sync,
{
    lattice_readout(&multidim_state(family, lat, init, power)?)
}

/// Family `u ↦ diag(e^{2πi⟨u, x⟩})` on a one-level outcome register; raised to
/// the power `N` it is the exact multivariate phase unitary for `x`.
pub fn exact_phase_family<T: Real>(x: Vec<T>) -> impl Fn(usize, &[T]) -> CMatrix<T> + Sync {
    move |_, u| {
        let dot: T = u.iter().zip(&x).map(|(&a, &b)| a * b).sum();
        let phi = T::TAU() * dot;
        CMatrix::diagonal(&[Complex::new(phi.cos(), phi.sin())])
    }
}

/// Exact table for a lattice channel whose per-point action on `|0⟩` is
/// `c_u|0⟩ + (junk orthogonal to every other point's junk)`.
///
/// `coherent[u] = ⟨0|V_u|0⟩`; the junk branch contributes the uniform floor
/// `Σ_u (1 − |c_u|²) / N^{2d}`.
pub fn channel_phase_estimate<T: Real>(lat: LatticeSpec, coherent: &[Complex<T>]) -> Result<PEOutcome<T>> {
    check_cap("lattice channel state", lat.points())?;
    let points = lat.points() as usize;
    if coherent.len() != points {
        return Err(Error::Layout(format!("{} channel amplitudes for {points} lattice points", coherent.len())));
    }
    let scale = T::one() / T::lit(points as f64).sqrt();
    let amps: Vec<Complex<T>> = coherent.iter().map(|c| *c * scale).collect();
    let junk: T = coherent.iter().map(|c| (T::one() - c.norm_sqr()).max(T::zero())).sum();
    let layout = Layout::new(Some(lat), 1, None)?;
    let state = StateVector::from_parts_unchecked(layout, amps);
    let mut out = lattice_readout(&state)?;
    let floor = junk / (T::lit(points as f64) * T::lit(points as f64));
    for p in &mut out.table {
        *p += floor;
    }
    Ok(out)
}

/// Perturbation model of [`noise_injection`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// `a|φ⟩|0⟩ + b|φ̃⟩|1⟩` on a new two-level junk register, where `φ̃`
    /// carries a random phase per lattice point; distance exactly `ε`.
    OrthogonalJunk,
    /// Random per-lattice-point phases scaled so the distance is `ε` when
    /// reachable, otherwise maximal.
    PhaseJitter,
}

/// Perturbs `state` to distance `ε ∈ [0, 2]`. In orthogonal-junk mode the
/// distance is measured against `state.with_junk(2)`.
pub fn noise_injection<T: Real>(state: &StateVector<T>, eps: T, mode: NoiseMode, seed: u64) -> Result<StateVector<T>> {
    if !(eps >= T::zero() && eps <= T::lit(2.0)) {
        return Err(Error::pre(format!("noise level {eps} outside [0, 2]")));
    }
    let mut rng = rng::rng(seed);
    let layout = *state.layout();
    let block = if layout.lattice().is_some() { layout.block() } else { 1 };
    let groups = state.amplitudes().len() / block;
    let r: Vec<T> = (0..groups).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
    match mode {
        NoiseMode::OrthogonalJunk => {
            let mut out = state.with_junk(2)?;
            let a = T::one() - eps * eps / T::lit(2.0);
            let b = (T::one() - a * a).max(T::zero()).sqrt();
            let amps = out.amplitudes_mut();
            for (i, chunk) in amps.chunks_mut(2).enumerate() {
                let phi = T::PI() * r[i / block];
                let z = chunk[0];
                chunk[0] = z * a;
                chunk[1] = z * Complex::new(phi.cos(), phi.sin()) * b;
            }
            Ok(out)
        }
        NoiseMode::PhaseJitter => {
            let weights: Vec<T> =
                state.amplitudes().chunks(block).map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect();
            let dist = |s: T| -> T {
                weights
                    .iter()
                    .zip(&r)
                    .map(|(&w, &ri)| {
                        let h = (s * ri / T::lit(2.0)).sin();
                        w * T::lit(4.0) * h * h
                    })
                    .sum::<T>()
                    .sqrt()
            };
            let (mut lo, mut hi) = (T::zero(), T::PI());
            let s = if dist(hi) <= eps {
                hi
            } else {
                for _ in 0..200 {
                    let mid = (lo + hi) / T::lit(2.0);
                    if dist(mid) < eps {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            };
            let mut out = state.clone();
            for (i, chunk) in out.amplitudes_mut().chunks_mut(block).enumerate() {
                let phi = s * r[i];
                let e = Complex::new(phi.cos(), phi.sin());
                for z in chunk {
                    *z *= e;
                }
            }
            Ok(out)
        }
    }
}
