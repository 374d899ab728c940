use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::Serialize;

use super::{check_cap, LatticeSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::prob::IndexSampler;
use crate::rng::{self, Rng};
use crate::scalar::{tol, Real};

/// A register of a [`Layout`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Register {
    /// Lattice axis `α`.
    Axis(usize),
    /// Outcome register of size `|Ω|`.
    Outcome,
    /// Junk register.
    Junk,
}

/// Ordered register list: lattice axes, outcome register, optional junk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Layout {
    lattice: Option<LatticeSpec>,
    outcome: usize,
    junk: Option<usize>,
}

impl Layout {
    /// Layout with the given registers.
    pub fn new(lattice: Option<LatticeSpec>, outcome: usize, junk: Option<usize>) -> Result<Self> {
        if outcome == 0 || junk == Some(0) {
            return Err(Error::pre("register sizes must be positive"));
        }
        let layout = Self { lattice, outcome, junk };
        check_cap("state vector", layout.size_u128())?;
        Ok(layout)
    }

    /// Lattice, if present.
    pub fn lattice(&self) -> Option<LatticeSpec> {
        self.lattice
    }

    /// Outcome register size.
    pub fn outcome(&self) -> usize {
        self.outcome
    }

    /// Junk register size, if present.
    pub fn junk(&self) -> Option<usize> {
        self.junk
    }

    /// Number of lattice points (1 without a lattice).
    pub fn lattice_points(&self) -> usize {
        self.lattice.map_or(1, |l| l.points() as usize)
    }

    /// Amplitudes per lattice point.
    pub fn block(&self) -> usize {
        self.outcome * self.junk.unwrap_or(1)
    }

    fn size_u128(&self) -> u128 {
        self.lattice.map_or(1, |l| l.points()) * self.outcome as u128 * self.junk.unwrap_or(1) as u128
    }

    /// Total number of amplitudes.
    pub fn size(&self) -> usize {
        self.size_u128() as usize
    }

    fn registers(&self) -> Vec<(Register, usize)> {
        let mut regs = Vec::new();
        if let Some(l) = self.lattice {
            regs.extend((0..l.dim()).map(|a| (Register::Axis(a), l.resolution())));
        }
        regs.push((Register::Outcome, self.outcome));
        if let Some(j) = self.junk {
            regs.push((Register::Junk, j));
        }
        regs
    }
}

/// Pure state over a [`Layout`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    layout: Layout,
    amps: Vec<Complex<T>>,
}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn norm_tol<T: Real>() -> T {
    T::lit(tol::NORM).max(T::epsilon().sqrt() * T::lit(4.0))
}

impl<T: Real> StateVector<T> {
    /// Builds a state; rejects wrong length or norm off by more than `1e-10`.
    pub fn new(layout: Layout, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != layout.size() {
            return Err(Error::Layout(format!("{} amplitudes for layout of size {}", amps.len(), layout.size())));
        }
        let nrm = linalg::norm(&amps);
        if (nrm - T::one()).abs() > norm_tol::<T>() {
            return Err(Error::pre(format!("state is not normalized: norm {nrm}")));
        }
        Ok(Self { layout, amps })
    }

    /// State over the outcome register only.
    pub fn outcome_state(amps: Vec<Complex<T>>) -> Result<Self> {
        let layout = Layout::new(None, amps.len(), None)?;
        Self::new(layout, amps)
    }

    /// Associated state `Σ √p_k |k⟩` of a probability vector.
    pub fn synthesizer_state(p: &[T]) -> Result<Self> {
        Self::outcome_state(p.iter().map(|&pk| Complex::new(pk.sqrt(), T::zero())).collect())
    }

    /// `(1/N^{d/2}) Σ_u |u⟩ ⊗ |init⟩`.
    pub fn uniform_lattice_state(lat: LatticeSpec, init: &StateVector<T>) -> Result<Self> {
        if init.layout.lattice.is_some() || init.layout.junk.is_some() {
            return Err(Error::Layout("initial state must live on the outcome register only".into()));
        }
        let layout = Layout::new(Some(lat), init.layout.outcome, None)?;
        let scale = T::one() / T::lit(lat.points() as f64).sqrt();
        let block: Vec<Complex<T>> = init.amps.iter().map(|a| *a * scale).collect();
        let mut amps = Vec::with_capacity(layout.size());
        for _ in 0..layout.lattice_points() {
            amps.extend_from_slice(&block);
        }
        Ok(Self { layout, amps })
    }

    /// Layout.
    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Amplitudes.
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    /// 2-norm.
    pub fn norm(&self) -> T {
        linalg::norm(&self.amps)
    }

    /// Embeds the state as `|φ⟩ ⊗ |0⟩` with a fresh junk register of `size` levels.
    pub fn with_junk(&self, size: usize) -> Result<Self> {
        if self.layout.junk.is_some() {
            return Err(Error::Layout("state already has a junk register".into()));
        }
        let layout = Layout::new(self.layout.lattice, self.layout.outcome, Some(size))?;
        let mut amps = vec![zero(); layout.size()];
        for (i, a) in self.amps.iter().enumerate() {
            amps[i * size] = *a;
        }
        Ok(Self { layout, amps })
    }

    /// Multiplies each lattice block `|u⟩ ⊗ ·` by `family(u)^power` acting on the
    /// outcome register. `family` receives the flat lattice index and coordinates.
    pub fn apply_per_lattice_unitary<F>(&mut self, family: F, power: u64) -> Result<()>
    where
        F: Fn(usize, &[T]) -> CMatrix<T> + Sync,
    {
        let lat =
            self.layout.lattice.ok_or_else(|| Error::Layout("per-lattice unitary needs a lattice register".into()))?;
        let outcome = self.layout.outcome;
        let junk = self.layout.junk.unwrap_or(1);
        let block = self.layout.block();
        let check = outcome <= 64;
        self.amps.par_chunks_mut(block).enumerate().try_for_each(|(idx, chunk)| {
            let u = lat.point::<T>(idx);
            let m = family(idx, &u);
            if m.order() != outcome {
                return Err(Error::Layout(format!(
                    "family member at {idx} has order {}, expected {outcome}",
                    m.order()
                )));
            }
            if check {
                let defect = m.unitarity_defect();
                if !(defect <= norm_tol::<T>()) {
                    return Err(Error::NonUnitary { index: idx, deviation: defect.to_f64_lossy() });
                }
            }
            if power == 0 {
                return Ok(());
            }
            let mp = m.pow(power);
            apply_block(&mp, chunk, outcome, junk);
            Ok(())
        })
    }

    /// Multiplies the outcome register by `m` (no lattice required).
    pub fn apply_outcome_unitary(&mut self, m: &CMatrix<T>) -> Result<()> {
        if m.order() != self.layout.outcome {
            return Err(Error::Layout("operator order does not match the outcome register".into()));
        }
        let outcome = self.layout.outcome;
        let junk = self.layout.junk.unwrap_or(1);
        for chunk in self.amps.chunks_mut(self.layout.block()) {
            apply_block(m, chunk, outcome, junk);
        }
        Ok(())
    }

    fn lattice_fft(&mut self, direction: FftDirection) -> Result<()> {
        let lat = self.layout.lattice.ok_or_else(|| Error::Layout("QFT needs a lattice register".into()))?;
        let n = lat.resolution();
        let d = lat.dim();
        let fft = FftPlanner::<T>::new().plan_fft(n, direction);
        let scale = T::one() / T::count(n).sqrt();
        let block = self.layout.block();
        let mut line = vec![zero::<T>(); n];
        let mut scratch = vec![zero::<T>(); fft.get_inplace_scratch_len()];
        for axis in 0..d {
            let stride = n.pow((d - 1 - axis) as u32) * block;
            let outer = n.pow(axis as u32);
            for o in 0..outer {
                let base = o * n * stride;
                for s in 0..stride {
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = self.amps[base + s + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        self.amps[base + s + j * stride] = *v * scale;
                    }
                }
            }
        }
        Ok(())
    }

    /// Per-axis inverse QFT: `|j⟩ ↦ N^{-1/2} Σ_m e^{−2πi jm/N} |m⟩`.
    ///
    /// A lattice plane wave `e^{2πi N ⟨u, y⟩}` with `y = m/N` maps to `|m⟩` up
    /// to a global phase; measured index `m` reads as the fraction
    /// [`LatticeSpec::fraction`].
    pub fn inverse_qft_lattice(&mut self) -> Result<()> {
        self.lattice_fft(FftDirection::Forward)
    }

    /// Per-axis QFT, the inverse of [`Self::inverse_qft_lattice`].
    pub fn qft_lattice(&mut self) -> Result<()> {
        self.lattice_fft(FftDirection::Inverse)
    }

    /// Exact marginal over `registers` (listed in layout order or not; the
    /// table is indexed row-major in the order given).
    pub fn measure_distribution(&self, registers: &[Register]) -> Result<MeasurementDistribution<T>> {
        if registers.is_empty() {
            return Err(Error::pre("measurement needs at least one register"));
        }
        let all = self.layout.registers();
        let mut positions = Vec::with_capacity(registers.len());
        for r in registers {
            let pos = all
                .iter()
                .position(|(q, _)| q == r)
                .ok_or_else(|| Error::Layout(format!("register {r:?} not in layout")))?;
            if positions.contains(&pos) {
                return Err(Error::Layout(format!("register {r:?} listed twice")));
            }
            positions.push(pos);
        }
        let sizes: Vec<usize> = all.iter().map(|(_, s)| *s).collect();
        let shape: Vec<usize> = positions.iter().map(|&p| sizes[p]).collect();
        let total: usize = shape.iter().product();
        let mut probs = vec![T::zero(); total];
        let mut idx = vec![0usize; sizes.len()];
        for a in &self.amps {
            let mut flat = 0;
            for &p in &positions {
                flat = flat * sizes[p] + idx[p];
            }
            probs[flat] += a.norm_sqr();
            for r in (0..sizes.len()).rev() {
                idx[r] += 1;
                if idx[r] < sizes[r] {
                    break;
                }
                idx[r] = 0;
            }
        }
        Ok(MeasurementDistribution { registers: registers.to_vec(), shape, probs })
    }

    /// `‖a − b‖₂`; global phases are not quotiented.
    pub fn state_distance(&self, other: &StateVector<T>) -> Result<T> {
        if self.layout != other.layout {
            return Err(Error::Layout("state distance needs identical layouts".into()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| (*a - *b).norm_sqr()).sum::<T>().sqrt())
    }

    pub(crate) fn from_parts_unchecked(layout: Layout, amps: Vec<Complex<T>>) -> Self {
        Self { layout, amps }
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amps
    }
}

fn apply_block<T: Real>(m: &CMatrix<T>, chunk: &mut [Complex<T>], outcome: usize, junk: usize) {
    let mut col = vec![zero::<T>(); outcome];
    let mut out = vec![zero::<T>(); outcome];
    for j in 0..junk {
        for k in 0..outcome {
            col[k] = chunk[k * junk + j];
        }
        m.mul_vec_into(&col, &mut out);
        for k in 0..outcome {
            chunk[k * junk + j] = out[k];
        }
    }
}

/// Exact probability table over a register subset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementDistribution<T> {
    registers: Vec<Register>,
    shape: Vec<usize>,
    probs: Vec<T>,
}

impl<T: Real> MeasurementDistribution<T> {
    /// Measured registers.
    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    /// Table shape.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Row-major probabilities.
    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Splits a flat table index into per-register indices.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for a in (0..self.shape.len()).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }

    /// `trials` i.i.d. flat indices from a seed.
    pub fn sample(&self, seed: u64, trials: usize) -> Vec<usize> {
        self.sample_with(&mut rng::rng(seed), trials)
    }

    /// `trials` i.i.d. flat indices from a running generator.
    pub fn sample_with(&self, rng: &mut Rng, trials: usize) -> Vec<usize> {
        let weights: Vec<f64> = self.probs.iter().map(|p| p.to_f64_lossy()).collect();
        let sampler = IndexSampler::new(&weights);
        (0..trials).map(|_| sampler.draw(rng)).collect()
    }
}
