use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Hypercubic lattice `G_N ⊂ (−1/2, 1/2)^d` with per-axis coordinates
/// `u_j = j/N − 1/2 + 1/(2N)`, `j ∈ {0..N−1}`.
///
/// `N` is a power of two, so every coordinate is a dyadic rational: the
/// coordinates are exactly symmetric about zero and sum to zero exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatticeSpec {
    d: usize,
    n: usize,
}

impl LatticeSpec {
    /// Lattice of dimension `d ≥ 1` and resolution `n` (a power of two ≥ 1).
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::pre("lattice dimension must be at least 1"));
        }
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::pre(format!("lattice resolution {n} is not a power of two")));
        }
        Ok(Self { d, n })
    }

    /// Dimension `d`.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Resolution `N`.
    pub fn resolution(&self) -> usize {
        self.n
    }

    /// Number of lattice points `N^d` (saturating).
    pub fn points(&self) -> u128 {
        (self.n as u128).saturating_pow(self.d as u32)
    }

    /// Coordinate `u_j`.
    pub fn coordinate<T: Real>(&self, j: usize) -> T {
        let n = self.n as f64;
        T::lit((2.0 * j as f64 + 1.0 - n) / (2.0 * n))
    }

    /// All per-axis coordinates.
    pub fn coordinates<T: Real>(&self) -> Vec<T> {
        (0..self.n).map(|j| self.coordinate(j)).collect()
    }

    /// Per-axis indices of a flat lattice index (axis 0 slowest).
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.d];
        for a in (0..self.d).rev() {
            idx[a] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    /// Coordinates of a flat lattice index.
    pub fn point<T: Real>(&self, flat: usize) -> Vec<T> {
        self.multi_index(flat).into_iter().map(|j| self.coordinate(j)).collect()
    }

    /// Phase fraction in `[−1/2, 1/2)` encoded by measured index `m`.
    pub fn fraction<T: Real>(&self, m: usize) -> T {
        let n = self.n as f64;
        let m = m as f64;
        T::lit(if 2.0 * m >= n { m / n - 1.0 } else { m / n })
    }
}
