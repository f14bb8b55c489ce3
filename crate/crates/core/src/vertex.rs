//! Momentum-dependent atom-pair/molecule coupling.

use num_complex::Complex64;

use crate::model::{ModelParams, QuasiMomentum, VertexShape};
use crate::special::{spherical_bessel_unchecked, spherical_harmonic_unchecked};

/// `g j_l(|r̃₀| s) Y*_lm(k̂)` with `s = |k|`, or `s = |k|/2` when `half_argument`.
///
/// The harmonic is always evaluated at the direction of `k`; only the Bessel
/// argument is halved (the `t₁` coupling uses the relative momentum of the pair).
pub fn resonance_vertex(params: &ModelParams, k: &QuasiMomentum, half_argument: bool) -> Complex64 {
    match params.vertex {
        VertexShape::Constant => Complex64::new(params.g, 0.0),
        VertexShape::PartialWave { l, m } => {
            let mut s = k.magnitude(params.half_length);
            if half_argument {
                s *= 0.5;
            }
            let radial = spherical_bessel_unchecked(l, params.r0_tilde * s);
            if radial == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let y = spherical_harmonic_unchecked(l, m, k.direction(params.half_length));
            params.g * radial * y.conj()
        }
    }
}
