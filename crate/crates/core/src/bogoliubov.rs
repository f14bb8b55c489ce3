//! Quadratic fluctuation Hamiltonian: block coefficients, closed-form
//! quasiparticle energies and an independent 4×4 eigenvalue oracle.

use nalgebra::{Matrix4, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{CondensateState, ModelParams, QuasiMomentum};
use crate::vertex::resonance_vertex;

/// The six coefficients of the fluctuation Hamiltonian at one momentum.
/// The background coupling `g₁₂` is dropped at this order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovBlock {
    pub eps1: f64,
    pub eps2: f64,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub t1: Complex64,
    pub t2: Complex64,
}

impl BogoliubovBlock {
    /// Block with `t₂ = 0`.
    pub fn new(eps1: f64, eps2: f64, lambda1: Complex64, lambda2: Complex64, t1: Complex64) -> Self {
        Self {
            eps1,
            eps2,
            lambda1,
            lambda2,
            t1,
            t2: Complex64::new(0.0, 0.0),
        }
    }
}

pub fn bogoliubov_coefficients(
    params: &ModelParams,
    state: &CondensateState,
    k: &QuasiMomentum,
) -> BogoliubovBlock {
    let k2 = k.magnitude_squared(params.half_length);
    let psi1 = state.psi1();
    let psi2 = state.psi2();
    let eps1 = params.kinetic(k2, 1) - params.mu1() + 2.0 * params.g1 * state.n10;
    let eps2 = params.kinetic(k2, 2) - params.mu2() + 2.0 * params.g2 * state.n20;
    let lambda1 = params.g1 * psi1 * psi1 + 2.0 * resonance_vertex(params, k, false) * psi2;
    let lambda2 = params.g2 * psi2 * psi2;
    let t1 = 2.0 * resonance_vertex(params, k, true) * psi1.conj();
    BogoliubovBlock::new(eps1, eps2, lambda1, lambda2, t1)
}

/// Upper and lower quasiparticle branches at one momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPair {
    pub e_plus: f64,
    pub e_minus: f64,
    pub stable: bool,
}

/// Scalar invariants of a block that the closed form is built from.
#[derive(Debug, Clone, Copy)]
struct Invariants {
    /// `e_p`
    e: f64,
    /// `d_p² + c_p²`
    radicand: f64,
    /// `E₊² E₋²`, computed without cancellation against `ε̃₁²ε̃₂²`.
    product_sq: f64,
    l1: f64,
    l2: f64,
    t: f64,
    cross: f64,
}

fn invariants(b: &BogoliubovBlock) -> Invariants {
    let l1 = b.lambda1.norm_sqr();
    let l2 = b.lambda2.norm_sqr();
    let t = b.t1.norm_sqr();
    let t2 = b.t2.norm_sqr();
    let cross = (b.lambda1.conj() * b.lambda2 * b.t1 * b.t1).re;
    let a1 = (b.eps1 - b.lambda1.norm()) * (b.eps1 + b.lambda1.norm());
    let a2 = (b.eps2 - b.lambda2.norm()) * (b.eps2 + b.lambda2.norm());
    let e = 0.5 * (a1 + a2) + t - t2;
    let d = 0.5 * (a1 - a2);
    let c2 = 2.0 * cross + 2.0 * b.eps1 * b.eps2 * t + b.eps2 * b.eps2 * t - t * l2
        + t * b.eps1 * b.eps1
        - t * l1;
    // e² - d² - c² expanded; exact for t₂ = 0
    let product_sq = a1 * a2 + t * t - 2.0 * t * b.eps1 * b.eps2 - 2.0 * cross;
    Invariants {
        e,
        radicand: d * d + c2,
        product_sq,
        l1,
        l2,
        t,
        cross,
    }
}

/// Relative size below which a negative `E₋²` is treated as rounding of a zero mode.
const SOFT_MODE_TOL: f64 = 1e-12;

/// `(E₊², E₋²)` or `None` when either is negative beyond rounding, or `d² + c² < 0`.
fn branch_squares(block: &BogoliubovBlock, inv: &Invariants) -> Option<(f64, f64)> {
    let scale = inv.e.abs().max(inv.radicand.abs().sqrt());
    if inv.radicand < -SOFT_MODE_TOL * scale * scale {
        return None;
    }
    let root = inv.radicand.max(0.0).sqrt();
    let plus_sq = inv.e + root;
    if plus_sq < 0.0 {
        return None;
    }
    let minus_direct = inv.e - root;
    if minus_direct < -SOFT_MODE_TOL * scale || inv.product_sq < -SOFT_MODE_TOL * scale * scale {
        return None;
    }
    // E₋² = E₊²E₋²/E₊² avoids the cancellation in e - √(d²+c²) for soft modes
    let minus_sq = if plus_sq > 0.0 && block.t2.norm_sqr() == 0.0 {
        inv.product_sq.max(0.0) / plus_sq
    } else {
        minus_direct.max(0.0)
    };
    Some((plus_sq, minus_sq))
}

/// `E²_± = e_p ± √(d_p² + c_p²)`. Negative radicands are reported through
/// `stable = false` with both energies set to NaN.
pub fn excitation_spectrum(block: &BogoliubovBlock) -> SpectrumPair {
    let inv = invariants(block);
    match branch_squares(block, &inv) {
        Some((plus_sq, minus_sq)) => SpectrumPair {
            e_plus: plus_sq.sqrt(),
            e_minus: minus_sq.sqrt(),
            stable: true,
        },
        None => unstable(),
    }
}

fn unstable() -> SpectrumPair {
    SpectrumPair {
        e_plus: f64::NAN,
        e_minus: f64::NAN,
        stable: false,
    }
}

/// `E₊ + E₋ - ε̃₁ - ε̃₂`, the zero-point shift of one momentum, or `None`
/// when the block is unstable.
///
/// Rewritten so that no two large terms cancel: with `S = ε̃₁ + ε̃₂` and
/// `P = E₊E₋`, `(E₊ + E₋)² - S² = 2Q₀/(P + ε̃₁ε̃₂ - |t₁|²) - |λ₁|² - |λ₂|²`
/// where `Q₀ = |λ₁|²|λ₂|² - ε̃₁²|λ₂|² - ε̃₂²|λ₁|² - 2Re{λ₁*λ₂t₁²}`.
pub fn zero_point_shift(block: &BogoliubovBlock) -> Option<f64> {
    let inv = invariants(block);
    let (plus_sq, minus_sq) = branch_squares(block, &inv)?;
    let p = inv.product_sq.max(0.0).sqrt();
    let sum = (2.0 * inv.e + 2.0 * p).sqrt();
    let s = block.eps1 + block.eps2;
    let den = p + block.eps1 * block.eps2 - inv.t;
    let denom_total = sum + s;
    if block.t2.norm_sqr() == 0.0 && den > 0.0 && denom_total > 0.0 {
        let q0 = inv.l1 * inv.l2
            - block.eps1 * block.eps1 * inv.l2
            - block.eps2 * block.eps2 * inv.l1
            - 2.0 * inv.cross;
        let numer = 2.0 * q0 / den - inv.l1 - inv.l2;
        Some(numer / denom_total)
    } else {
        Some(plus_sq.sqrt() + minus_sq.sqrt() - s)
    }
}

/// Outcome of the direct eigenvalue computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleOutcome {
    /// The two nonnegative eigenvalues of `ηM`, ascending.
    Stable([f64; 2]),
    /// `ηM` has eigenvalues off the real axis (or failed to converge).
    Unstable,
}

/// The 4×4 quadratic-form matrix in the basis `(a₁, a₂, a†₋₁, a†₋₂)`.
pub fn bdg_matrix(b: &BogoliubovBlock) -> Matrix4<Complex64> {
    let e1 = Complex64::new(b.eps1, 0.0);
    let e2 = Complex64::new(b.eps2, 0.0);
    Matrix4::new(
        e1,
        b.t1,
        b.lambda1,
        b.t2,
        b.t1.conj(),
        e2,
        b.t2,
        b.lambda2,
        b.lambda1.conj(),
        b.t2.conj(),
        e1,
        b.t1.conj(),
        b.t2.conj(),
        b.lambda2.conj(),
        b.t1,
        e2,
    )
}

/// Eigenvalues of `ηM`, `η = diag(1, 1, -1, -1)`, by a complex Schur decomposition.
/// They come in `±E` pairs; the nonnegative member of each pair is returned.
pub fn bdg_oracle(block: &BogoliubovBlock) -> OracleOutcome {
    let eta = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, -1.0, -1.0).map(|v| Complex64::new(v, 0.0)));
    let m = eta * bdg_matrix(block);
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let Some(schur) = Schur::try_new(m, 1e-15 * scale, 10_000) else {
        return OracleOutcome::Unstable;
    };
    let Some(eigs) = schur.eigenvalues() else {
        return OracleOutcome::Unstable;
    };
    let tol = 1e-9 * scale;
    if eigs.iter().any(|z| z.im.abs() > tol) {
        return OracleOutcome::Unstable;
    }
    let mut re: Vec<f64> = eigs.iter().map(|z| z.re).collect();
    re.sort_by(|a, b| a.total_cmp(b));
    // ±E pairs: the two largest are the positive members
    let lo = re[2].abs().max(re[1].abs());
    let hi = re[3].abs().max(re[0].abs());
    let (a, b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    OracleOutcome::Stable([a, b])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_momentum_limit_of_coefficients() {
        let p = fixtures::params();
        let s = CondensateState::new(0.4, 0.3, 0.2, 1.1).unwrap();
        let k = QuasiMomentum::new(0, 1e-6, 0.5).unwrap();
        let b = bogoliubov_coefficients(&p, &s, &k);
        assert!(b.t1.norm() < 1e-20);
        let expected = p.g1 * s.psi1() * s.psi1();
        assert_relative_eq!(b.lambda1.re, expected.re, max_relative = 1e-12);
        assert_relative_eq!(b.lambda1.im, expected.im, max_relative = 1e-12);
        assert_relative_eq!(b.lambda1.norm(), p.g1 * s.n10, max_relative = 1e-12);
        assert_eq!(b.t2, c(0.0, 0.0));
    }

    #[test]
    fn no_molecules_no_resonant_pairing() {
        let p = fixtures::params();
        let s = CondensateState::new(0.4, 0.3, 0.0, 0.0).unwrap();
        let k = QuasiMomentum::new(1, 1.3, 0.5).unwrap();
        let b = bogoliubov_coefficients(&p, &s, &k);
        assert_eq!(b.lambda2, c(0.0, 0.0));
        let expected = p.g1 * s.psi1() * s.psi1();
        assert_relative_eq!((b.lambda1 - expected).norm(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn on_axis_modes_decouple() {
        let s = CondensateState::new(0.4, 0.3, 0.2, 1.1).unwrap();
        let p = fixtures::params();
        let mu = p.g1 * s.n10;
        let p = p.with_mu_nu(mu, 2.0 * mu - p.g2 * s.n20);
        let k = QuasiMomentum::new(2, 0.0, 0.0).unwrap();
        let b = bogoliubov_coefficients(&p, &s, &k);
        assert_eq!(b.t1.norm(), 0.0);
        let expected = p.g1 * s.psi1() * s.psi1();
        assert_relative_eq!((b.lambda1 - expected).norm(), 0.0, epsilon = 1e-16);
        let sp = excitation_spectrum(&b);
        let atom = (b.eps1 * b.eps1 - b.lambda1.norm_sqr()).sqrt();
        let mol = (b.eps2 * b.eps2 - b.lambda2.norm_sqr()).sqrt();
        let (lo, hi) = if atom < mol { (atom, mol) } else { (mol, atom) };
        assert_relative_eq!(sp.e_minus, lo, max_relative = 1e-13);
        assert_relative_eq!(sp.e_plus, hi, max_relative = 1e-13);
    }

    #[test]
    fn pure_asf_block_decouples() {
        let b = BogoliubovBlock::new(1.5, 0.9, c(0.6, 0.8), c(0.0, 0.0), c(0.0, 0.0));
        let sp = excitation_spectrum(&b);
        assert!(sp.stable);
        let atom = (1.5f64 * 1.5 - 1.0).sqrt();
        assert_relative_eq!(sp.e_plus, atom.max(0.9), max_relative = 1e-14);
        assert_relative_eq!(sp.e_minus, atom.min(0.9), max_relative = 1e-14);
        match bdg_oracle(&b) {
            OracleOutcome::Stable([lo, hi]) => {
                assert_relative_eq!(lo, atom.min(0.9), max_relative = 1e-12);
                assert_relative_eq!(hi, atom.max(0.9), max_relative = 1e-12);
            }
            OracleOutcome::Unstable => panic!("stable block flagged"),
        }
    }

    #[test]
    fn diagonal_block_oracle() {
        let b = BogoliubovBlock::new(2.0, 0.5, c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(bdg_oracle(&b), OracleOutcome::Stable([0.5, 2.0]));
    }

    #[test]
    fn asf_phonon_dispersion() {
        let p = fixtures::params().with_g(0.0);
        let n10 = 0.7;
        let p = p.with_mu_nu(n10 * p.g1, 2.0 * n10 * p.g1 + 3.0);
        let s = CondensateState::real(n10, 0.0).unwrap();
        for kp in [0.05, 0.3, 1.0] {
            let k = QuasiMomentum::new(0, kp, 0.0).unwrap();
            let b = bogoliubov_coefficients(&p, &s, &k);
            let sp = excitation_spectrum(&b);
            let eps = kp * kp / 2.0;
            let bog = (eps * eps + 2.0 * n10 * p.g1 * eps).sqrt();
            assert_relative_eq!(sp.e_minus, bog, max_relative = 1e-10);
        }
    }

    #[test]
    fn instability_is_flagged() {
        let b = BogoliubovBlock::new(1.0, 1.0, c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let sp = excitation_spectrum(&b);
        assert!(!sp.stable);
        assert_eq!(bdg_oracle(&b), OracleOutcome::Unstable);
        assert!(zero_point_shift(&b).is_none());
    }

    #[test]
    fn zero_point_shift_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let e1 = rng.gen_range(0.5..3.0);
            let e2 = rng.gen_range(0.5..3.0);
            let l1 = Complex64::from_polar(rng.gen_range(0.0..0.4) * e1, rng.gen_range(0.0..6.3));
            let l2 = Complex64::from_polar(rng.gen_range(0.0..0.4) * e2, rng.gen_range(0.0..6.3));
            let t = Complex64::from_polar(rng.gen_range(0.0..0.3) * e1.min(e2), rng.gen_range(0.0..6.3));
            let b = BogoliubovBlock::new(e1, e2, l1, l2, t);
            let sp = excitation_spectrum(&b);
            let direct = sp.e_plus + sp.e_minus - e1 - e2;
            let stable = zero_point_shift(&b).unwrap();
            assert_relative_eq!(stable, direct, max_relative = 1e-9, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_point_shift_large_momentum_asymptote() {
        // E - ε̃ → -|λ|²/(2ε̃) per branch when ε̃ ≫ |λ|
        let e1 = 1e6;
        let e2 = 5e5;
        let b = BogoliubovBlock::new(e1, e2, c(1e-3, 0.0), c(0.0, 2e-3), c(0.0, 0.0));
        let expected = -1e-6 / (2.0 * e1) - 4e-6 / (2.0 * e2);
        assert_relative_eq!(zero_point_shift(&b).unwrap(), expected, max_relative = 1e-9);
    }
}
