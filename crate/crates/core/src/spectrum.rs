//! Grover operator `G = (2|1⟩⟨1| − I)·diag(e^{iθ_k})` and its spectrum.
//!
//! Non-degenerate eigenphases are the roots of
//! `f(β) = E[tan((θ − β)/2)]`, one per interval between consecutive poles
//! `β ≡ θ_c − π` of distinct angle classes carrying positive mass. Each class
//! `S` of equal angles contributes `|S| − 1` further eigenvectors at phase
//! `θ_S − π`, supported on `S` and orthogonal to `|1⟩`; zero-probability
//! outcomes contribute one such eigenvector each. Together these give exactly
//! `|Ω|` orthonormal eigenvectors.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::prob::UniRv;
use crate::scalar::{tol, Real};

/// Largest outcome register for which dense operators are built.
pub const MAX_DENSE_OUTCOMES: usize = 64;

/// Maps a phase into `(−π, π]`.
pub fn canonical_phase<T: Real>(x: T) -> T {
    let two_pi = T::TAU();
    let mut y = x - two_pi * (x / two_pi).round();
    if y <= -T::PI() {
        y += two_pi;
    } else if y > T::PI() {
        y -= two_pi;
    }
    y
}

/// Dense Grover operator of an angle variable.
#[derive(Debug, Clone)]
pub struct GroverOperator<T> {
    theta: UniRv<T>,
    one: Vec<Complex<T>>,
    matrix: CMatrix<T>,
}

impl<T: Real> GroverOperator<T> {
    /// Builds `G` for the angle variable `theta`; `|Ω| ≤ 64`.
    pub fn new(theta: &UniRv<T>) -> Result<Self> {
        let n = theta.len();
        if n > MAX_DENSE_OUTCOMES {
            return Err(Error::Cap {
                what: "dense Grover operator".into(),
                needed: n as u128,
                cap: MAX_DENSE_OUTCOMES as u128,
            });
        }
        Ok(Self::new_unchecked(theta))
    }

    pub(crate) fn new_unchecked(theta: &UniRv<T>) -> Self {
        let n = theta.len();
        let sq: Vec<T> = theta.probs().iter().map(|p| p.sqrt()).collect();
        let phase: Vec<Complex<T>> = theta.values().iter().map(|&t| Complex::new(t.cos(), t.sin())).collect();
        let mut m = CMatrix::zeros(n);
        let two = T::lit(2.0);
        for j in 0..n {
            for k in 0..n {
                let r = two * sq[j] * sq[k] - if j == k { T::one() } else { T::zero() };
                *m.get_mut(j, k) = phase[k] * r;
            }
        }
        Self { theta: theta.clone(), one: sq.iter().map(|&s| Complex::new(s, T::zero())).collect(), matrix: m }
    }

    /// Angle variable.
    pub fn theta(&self) -> &UniRv<T> {
        &self.theta
    }

    /// Dense matrix.
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    /// Synthesizer state `|1⟩ = Σ √p_k |k⟩`.
    pub fn one_state(&self) -> &[Complex<T>] {
        &self.one
    }

    /// `‖G v − e^{iα} v‖` for a solution's state.
    pub fn residual(&self, sol: &SpectralSolution<T>) -> T {
        let gv = self.matrix.mul_vec(&sol.state);
        let e = Complex::new(sol.alpha.cos(), sol.alpha.sin());
        gv.iter().zip(&sol.state).map(|(a, b)| (*a - e * *b).norm_sqr()).sum::<T>().sqrt()
    }
}

/// Origin of a spectral solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionKind {
    /// Root of the eigenphase equation; carries weight on `|1⟩`.
    Root,
    /// Member of a degenerate angle class; orthogonal to `|1⟩`.
    Degenerate,
}

/// Eigenpair of a Grover operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSolution<T> {
    /// Eigenphase in `(−π, π]`.
    pub alpha: T,
    /// Eigenvector in random-variable form, `ψ_k = state_k / √p_k` (zero where `p_k = 0`).
    pub psi: Vec<Complex<T>>,
    /// Eigenvector as a unit state over the outcome register.
    pub state: Vec<Complex<T>>,
    /// `|⟨ψ|1⟩|²`.
    pub overlap: T,
    /// Root or degenerate.
    pub kind: SolutionKind,
}

/// `f(β) = Σ_{p_k > 0} p_k tan((θ_k − β)/2)`; non-increasing between poles.
pub fn eigenphase_function<T: Real>(theta: &UniRv<T>, beta: T) -> T {
    let half = T::lit(0.5);
    theta
        .probs()
        .iter()
        .zip(theta.values())
        .filter(|(&p, _)| p > T::zero())
        .map(|(&p, &t)| p * ((t - beta) * half).tan())
        .sum()
}

/// Class of outcomes whose angles agree modulo `2π` within `1e-9`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleClass<T> {
    /// Representative angle in `(−π, π]`.
    pub angle: T,
    /// Outcome indices.
    pub members: Vec<usize>,
    /// Total probability.
    pub mass: T,
}

/// Groups outcomes into angle classes (chained at tolerance `1e-9`, across the ±π seam).
pub fn angle_classes<T: Real>(theta: &UniRv<T>) -> Vec<AngleClass<T>> {
    let tol = T::lit(tol::EIGEN);
    let mut order: Vec<(T, usize)> = theta.values().iter().enumerate().map(|(k, &t)| (canonical_phase(t), k)).collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut groups: Vec<Vec<(T, usize)>> = Vec::new();
    for item in order {
        match groups.last_mut() {
            Some(g) if item.0 - g.last().expect("nonempty group").0 <= tol => g.push(item),
            _ => groups.push(vec![item]),
        }
    }
    if groups.len() > 1 {
        let first = groups[0][0].0;
        let last = groups.last().and_then(|g| g.last()).map(|x| x.0).expect("nonempty");
        if first + T::TAU() - last <= tol {
            let tail = groups.pop().expect("nonempty");
            let head = &mut groups[0];
            let mut merged: Vec<(T, usize)> = tail.into_iter().map(|(a, k)| (a - T::TAU(), k)).collect();
            merged.append(head);
            *head = merged;
        }
    }
    let p = theta.probs();
    groups
        .into_iter()
        .map(|g| {
            let angle = canonical_phase(g.iter().map(|x| x.0).sum::<T>() / T::count(g.len()));
            let mut members: Vec<usize> = g.iter().map(|x| x.1).collect();
            members.sort_unstable();
            let mass = members.iter().map(|&k| p[k]).sum();
            AngleClass { angle, members, mass }
        })
        .collect()
}

/// Bisection until the bracket is float-adjacent or narrower than `4·ε_mach`
/// in absolute terms, which bounds the iteration count near zero.
fn bisect<T: Real>(theta: &UniRv<T>, mut lo: T, mut hi: T) -> T {
    let floor = T::epsilon() * T::lit(4.0);
    for _ in 0..4000 {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi || hi - lo <= floor {
            break;
        }
        if eigenphase_function(theta, mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let f_lo = eigenphase_function(theta, lo).abs();
    let f_hi = eigenphase_function(theta, hi).abs();
    if f_lo <= f_hi {
        lo
    } else {
        hi
    }
}

/// Solves `f(α) = 0` on the closed bracket `[lo, hi]` by bisection.
///
/// Errors when a pole lies in the bracket or `f(lo) ≥ 0 ≥ f(hi)` fails.
pub fn solve_alpha<T: Real>(theta: &UniRv<T>, bracket: (T, T)) -> Result<T> {
    let (lo, hi) = bracket;
    if !(lo <= hi) {
        return Err(Error::pre(format!("empty bracket [{lo}, {hi}]")));
    }
    let err_pole = || Error::PoleInBracket { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() };
    for class in angle_classes(theta).iter().filter(|c| c.mass > T::zero()) {
        let pole = class.angle - T::PI();
        let m = ((lo - pole) / T::TAU()).ceil();
        if pole + m * T::TAU() <= hi {
            return Err(err_pole());
        }
    }
    let (f_lo, f_hi) = (eigenphase_function(theta, lo), eigenphase_function(theta, hi));
    if f_lo < T::zero() || f_hi > T::zero() {
        return Err(Error::NoSignChange { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
    }
    if f_lo == T::zero() {
        return Ok(canonical_phase(lo));
    }
    if f_hi == T::zero() {
        return Ok(canonical_phase(hi));
    }
    Ok(canonical_phase(bisect(theta, lo, hi)))
}

/// Bracket `[2(μ − cε), 2(μ + cε)]` with `μ = E tan(θ/2)`.
pub fn key_bracket<T: Real>(theta: &UniRv<T>, c: T, eps: T) -> (T, T) {
    let mu = theta.expect(|t| (t * T::lit(0.5)).tan());
    let two = T::lit(2.0);
    (two * (mu - c * eps), two * (mu + c * eps))
}

/// Root in the pole-free interval `(max θ − π, min θ + π)` around zero;
/// requires all angles in `(−π, π)` with spread below `2π`.
pub fn principal_alpha<T: Real>(theta: &UniRv<T>) -> Result<T> {
    let (mut lo, mut hi) = (T::neg_infinity(), T::infinity());
    for (&p, &t) in theta.probs().iter().zip(theta.values()) {
        if p > T::zero() {
            lo = lo.max(t - T::PI());
            hi = hi.min(t + T::PI());
        }
    }
    if !(lo < hi) {
        return Err(Error::PoleInBracket { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
    }
    Ok(canonical_phase(bisect(theta, lo, hi)))
}

/// Eigenvector for a root `alpha`:
/// `ψ = (1 − i tan((θ−α)/2)) / √(1 + E tan²((θ−α)/2))`.
pub fn eigvec_for_alpha<T: Real>(theta: &UniRv<T>, alpha: T) -> Result<SpectralSolution<T>> {
    for (&pk, &t) in theta.probs().iter().zip(theta.values()) {
        if pk > T::zero() && canonical_phase(t - alpha - T::PI()).abs() <= T::lit(tol::EIGEN) {
            return Err(Error::PoleInBracket { lo: alpha.to_f64_lossy(), hi: alpha.to_f64_lossy() });
        }
    }
    Ok(eigvec_unchecked(theta, alpha))
}

fn eigvec_unchecked<T: Real>(theta: &UniRv<T>, alpha: T) -> SpectralSolution<T> {
    let half = T::lit(0.5);
    let p = theta.probs();
    let tans: Vec<T> = theta.values().iter().map(|&t| ((t - alpha) * half).tan()).collect();
    let s: T = p.iter().zip(&tans).filter(|(&pk, _)| pk > T::zero()).map(|(&pk, &tk)| pk * tk * tk).sum();
    let scale = (T::one() + s).sqrt();
    let psi: Vec<Complex<T>> = p
        .iter()
        .zip(&tans)
        .map(
            |(&pk, &tk)| {
                if pk > T::zero() {
                    Complex::new(T::one(), -tk) / scale
                } else {
                    Complex::new(T::zero(), T::zero())
                }
            },
        )
        .collect();
    let state: Vec<Complex<T>> = psi.iter().zip(p).map(|(z, &pk)| *z * pk.sqrt()).collect();
    SpectralSolution {
        alpha: canonical_phase(alpha),
        psi,
        state,
        overlap: T::one() / (T::one() + s),
        kind: SolutionKind::Root,
    }
}

/// All roots of the eigenphase equation, one between each pair of adjacent poles.
pub fn root_solutions<T: Real>(theta: &UniRv<T>) -> Result<Vec<SpectralSolution<T>>> {
    let mut poles: Vec<T> = angle_classes(theta)
        .into_iter()
        .filter(|c| c.mass > T::zero())
        .map(|c| canonical_phase(c.angle - T::PI()))
        .collect();
    poles.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let m = poles.len();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let lo = poles[i];
        let hi = if i + 1 < m { poles[i + 1] } else { poles[0] + T::TAU() };
        let alpha = bisect(theta, lo, hi);
        out.push(eigvec_unchecked(theta, alpha));
    }
    Ok(out)
}

/// Eigenvectors of the degenerate classes (and of zero-probability outcomes).
///
/// For a class `S` with value `φ` the phase is `φ − π` and the eigenspace is
/// `{ψ : ψ_k = 0 ∀k ∉ S, E ψ = 0}`; an orthonormal basis is returned.
pub fn degenerate_spectrum<T: Real>(theta: &UniRv<T>) -> Vec<SpectralSolution<T>> {
    let n = theta.len();
    let p = theta.probs();
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = Vec::new();
    for class in angle_classes(theta) {
        let alpha = canonical_phase(class.angle - T::PI());
        let s = class.members.len();
        let mut basis: Vec<Vec<T>> = Vec::new();
        let mut w: Vec<T> = class.members.iter().map(|&k| p[k].sqrt()).collect();
        let wn = w.iter().map(|&x| x * x).sum::<T>().sqrt();
        let target = if class.mass > T::zero() { s - 1 } else { s };
        if target == 0 {
            continue;
        }
        if wn > T::zero() {
            for x in &mut w {
                *x /= wn;
            }
        }
        for cand in 0..s {
            if basis.len() == target {
                break;
            }
            let mut v = vec![T::zero(); s];
            v[cand] = T::one();
            let mut refs: Vec<&Vec<T>> = basis.iter().collect();
            if wn > T::zero() {
                refs.push(&w);
            }
            for _ in 0..2 {
                for r in &refs {
                    let dot: T = v.iter().zip(r.iter()).map(|(&a, &b)| a * b).sum();
                    for (vi, &ri) in v.iter_mut().zip(r.iter()) {
                        *vi -= dot * ri;
                    }
                }
            }
            let vn = v.iter().map(|&x| x * x).sum::<T>().sqrt();
            if vn > T::lit(1e-6) {
                basis.push(v.into_iter().map(|x| x / vn).collect());
            }
        }
        for v in basis {
            let mut state = vec![zero; n];
            let mut psi = vec![zero; n];
            for (i, &k) in class.members.iter().enumerate() {
                state[k] = Complex::new(v[i], T::zero());
                if p[k] > T::zero() {
                    psi[k] = Complex::new(v[i] / p[k].sqrt(), T::zero());
                }
            }
            out.push(SpectralSolution { alpha, psi, state, overlap: T::zero(), kind: SolutionKind::Degenerate });
        }
    }
    out
}

/// Complete eigen-decomposition: roots followed by degenerate solutions.
pub fn full_spectrum<T: Real>(theta: &UniRv<T>) -> Result<Vec<SpectralSolution<T>>> {
    let mut all = root_solutions(theta)?;
    all.extend(degenerate_spectrum(theta));
    Ok(all)
}

/// `λ = 5/(4 − 5 s0²)`.
pub fn key_lambda<T: Real>(s0: T) -> T {
    T::lit(5.0) / (T::lit(4.0) - T::lit(5.0) * s0 * s0)
}

/// Verdict of the key spectral property for a bounded variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCertificate<T> {
    /// Mean bound `ε`.
    pub eps: T,
    /// Second-moment bound `s0`.
    pub s0: T,
    /// Truncation scale `λ = 5/(4 − 5 s0²)`.
    pub lambda: T,
    /// Proximity constant `c = 7.635 s0²/(1 + s0²)`.
    pub c: T,
    /// Overlap deficit `δ = 1.7983 s0² + 7.480 s0 ε`.
    pub delta: T,
    /// Allowed `|α − E X|`: `3.1588 s0² ε/(1 − 1.25 s0²)`.
    pub alpha_bound: T,
    /// Required overlap: `1 − ¼(1.7983 s0² + 7.480 s0 ε/(1 − 1.25 s0²))`.
    pub overlap_bound: T,
    /// Measured `|α − E X|`.
    pub alpha_error: T,
    /// Measured overlap.
    pub overlap: T,
    /// `alpha_error ≤ alpha_bound`.
    pub alpha_ok: bool,
    /// `overlap ≥ overlap_bound`.
    pub overlap_ok: bool,
}

impl<T: Real> SpectrumCertificate<T> {
    /// Both checks hold.
    pub fn passed(&self) -> bool {
        self.alpha_ok && self.overlap_ok
    }

    /// Converts a failed verdict into an error.
    pub fn check(&self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::Certificate(format!(
                "|α − E X| = {:e} (bound {:e}), overlap = {} (bound {})",
                self.alpha_error.to_f64_lossy(),
                self.alpha_bound.to_f64_lossy(),
                self.overlap.to_f64_lossy(),
                self.overlap_bound.to_f64_lossy()
            )))
        }
    }
}

fn check_key_preconditions<T: Real>(rv: &UniRv<T>, eps: T, s0: T) -> Result<()> {
    let m = rv.moments();
    let third = T::one() / T::lit(3.0);
    if !(eps > T::zero() && eps <= s0 && s0 <= third) {
        return Err(Error::pre(format!("need 0 < ε ≤ s0 ≤ 1/3, got ε = {eps}, s0 = {s0}")));
    }
    if m.mean.abs() > eps {
        return Err(Error::pre(format!("|E X| = {} exceeds ε = {eps}", m.mean.abs())));
    }
    if m.second_moment > s0 * s0 {
        return Err(Error::pre(format!("E X² = {} exceeds s0² = {}", m.second_moment, s0 * s0)));
    }
    Ok(())
}

/// Principal eigenpair of `G` on `θ = 2 arctan(½ trunc(X, 1/(λε)))` and the
/// two quantitative checks, which are reported rather than raised.
pub fn certify_key_property<T: Real>(
    rv: &UniRv<T>,
    eps: T,
    s0: T,
) -> Result<(SpectrumCertificate<T>, SpectralSolution<T>)> {
    check_key_preconditions(rv, eps, s0)?;
    let lambda = key_lambda(s0);
    let theta = rv.to_angle(lambda, eps)?;
    let alpha = principal_alpha(&theta)?;
    let sol = eigvec_for_alpha(&theta, alpha)?;
    let mean = rv.moments().mean;
    let s2 = s0 * s0;
    let denom = T::one() - T::lit(1.25) * s2;
    let alpha_bound = T::lit(3.1588) * s2 * eps / denom;
    let overlap_bound = T::one() - T::lit(0.25) * (T::lit(1.7983) * s2 + T::lit(7.480) * s0 * eps / denom);
    let alpha_error = (sol.alpha - mean).abs();
    let cert = SpectrumCertificate {
        eps,
        s0,
        lambda,
        c: T::lit(7.635) * s2 / (T::one() + s2),
        delta: T::lit(1.7983) * s2 + T::lit(7.480) * s0 * eps,
        alpha_bound,
        overlap_bound,
        alpha_error,
        overlap: sol.overlap,
        alpha_ok: alpha_error <= alpha_bound,
        overlap_ok: sol.overlap >= overlap_bound,
    };
    Ok((cert, sol))
}

/// `‖G^N|1⟩ − e^{iN E X}|1⟩‖²` against its bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceBound<T> {
    /// Exact squared distance.
    pub lhs: T,
    /// `1.7983 s0² + 7.480 s0 ε/(1−1.25 s0²) + (3.1588 N ε s0²/(1−1.25 s0²))²`.
    pub rhs: T,
}

impl<T: Real> DistanceBound<T> {
    /// `lhs ≤ rhs`.
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Exact state distance after `N` Grover steps versus the ideal phase.
pub fn state_distance_bound_check<T: Real>(rv: &UniRv<T>, eps: T, s0: T, n: u64) -> Result<DistanceBound<T>> {
    check_key_preconditions(rv, eps, s0)?;
    let theta = rv.to_angle(key_lambda(s0), eps)?;
    let g = GroverOperator::new(&theta)?;
    let one = g.one_state().to_vec();
    let mut v = one.clone();
    let mut tmp = v.clone();
    for _ in 0..n {
        g.matrix().mul_vec_into(&v, &mut tmp);
        std::mem::swap(&mut v, &mut tmp);
    }
    let phase = T::lit(n as f64) * rv.moments().mean;
    let e = Complex::new(phase.cos(), phase.sin());
    let target: Vec<Complex<T>> = one.iter().map(|z| *z * e).collect();
    let diff: Vec<Complex<T>> = v.iter().zip(&target).map(|(a, b)| *a - *b).collect();
    let lhs = linalg::norm(&diff).powi(2);
    let s2 = s0 * s0;
    let denom = T::one() - T::lit(1.25) * s2;
    let drift = T::lit(3.1588) * T::lit(n as f64) * eps * s2 / denom;
    let rhs = T::lit(1.7983) * s2 + T::lit(7.480) * s0 * eps / denom + drift * drift;
    Ok(DistanceBound { lhs, rhs })
}
