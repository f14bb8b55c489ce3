//! Spherical Bessel functions and spherical harmonics for the partial-wave
//! resonance vertex.
//!
//! `j_l` uses the ascending series below a per-order switch point and the
//! trigonometric closed form (upward recurrence seeded with `j_0`, `j_1`)
//! above it. `Y_lm` is built from normalized associated Legendre functions
//! with the Condon-Shortley phase, `Y_lm ∝ e^{imφ}`, `∫|Y_lm|² dΩ = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Highest partial wave supported by the special functions.
pub const MAX_ORDER: u32 = 10;

const TWO_PI: f64 = 2.0 * PI;

/// A unit direction in spherical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    /// `theta` must lie in `[0, π]`; `phi` is wrapped into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !phi.is_finite() {
            return Err(Error::Domain(format!(
                "direction requires theta in [0, pi] and finite phi, got ({theta}, {phi})"
            )));
        }
        Ok(Self {
            theta,
            phi: wrap_angle(phi),
        })
    }

    /// Direction of the vector with polar components `(k_z, k_par)` and azimuth `phi`.
    pub fn from_components(k_z: f64, k_par: f64, phi: f64) -> Self {
        Self {
            theta: k_par.abs().atan2(k_z),
            phi: wrap_angle(phi),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TWO_PI);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if w >= TWO_PI {
        0.0
    } else {
        w
    }
}

fn double_factorial(n: u32) -> f64 {
    (1..=n).rev().step_by(2).map(f64::from).product()
}

/// Argument below which the ascending series is used for order `l`.
///
/// Upward recurrence loses roughly `(2l+1)!!/x^{2l+1}` relative accuracy
/// for `x < l`, while the alternating series stays within a few ulp up to
/// `x ≈ l` for every supported order.
pub fn series_switch(l: u32) -> f64 {
    f64::from(l).max(3.0)
}

fn bessel_series(l: u32, x: f64) -> f64 {
    let h = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60u32 {
        term *= h / (f64::from(k) * f64::from(2 * l + 2 * k + 1));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    x.powi(l as i32) / double_factorial(2 * l + 1) * sum
}

fn bessel_upward(l: u32, x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if l == 0 {
        return j0;
    }
    let mut prev = j0;
    let mut cur = (s / x - c) / x;
    for n in 1..l {
        let next = f64::from(2 * n + 1) / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Spherical Bessel function of the first kind `j_l(x)`, `0 ≤ l ≤ 10`, `x ≥ 0`.
pub fn spherical_bessel_j(l: u32, x: f64) -> Result<f64> {
    if l > MAX_ORDER {
        return Err(Error::Domain(format!(
            "spherical Bessel order {l} exceeds supported maximum {MAX_ORDER}"
        )));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "spherical Bessel argument must be finite and nonnegative, got {x}"
        )));
    }
    Ok(spherical_bessel_unchecked(l, x))
}

/// `j_l(x)` without argument validation. Callers guarantee `l ≤ 10`, `x ≥ 0`.
pub(crate) fn spherical_bessel_unchecked(l: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if x < series_switch(l) {
        bessel_series(l, x)
    } else {
        bessel_upward(l, x)
    }
}

/// Normalized associated Legendre function
/// `N_lm P_l^m(cos θ)` with `N_lm = sqrt((2l+1)/(4π) (l-m)!/(l+m)!)`,
/// Condon-Shortley phase included, `m ≥ 0`.
fn normalized_legendre(l: u32, m: u32, cos_theta: f64) -> f64 {
    let x = cos_theta;
    let s = (1.0 - x * x).max(0.0).sqrt();
    // diagonal: Pbar_mm = (-1)^m sqrt((2m+1)!!/(2m)!! / (4π)) s^m
    let mut pmm = (0.25 / PI).sqrt();
    for k in 1..=m {
        let kf = f64::from(k);
        pmm *= -((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s;
    }
    if l == m {
        return pmm;
    }
    let mf = f64::from(m);
    let mut p_prev = pmm;
    let mut p_cur = (2.0 * mf + 3.0).sqrt() * x * pmm;
    for ll in (m + 2)..=l {
        let lf = f64::from(ll);
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let next = a * (x * p_cur - b * p_prev);
        p_prev = p_cur;
        p_cur = next;
    }
    p_cur
}

/// Orthonormal spherical harmonic `Y_lm(θ, φ)` with Condon-Shortley phase.
pub fn spherical_harmonic(l: u32, m: i32, dir: Direction) -> Result<Complex64> {
    if l > MAX_ORDER || m.unsigned_abs() > l {
        return Err(Error::Domain(format!(
            "spherical harmonic requires |m| <= l <= {MAX_ORDER}, got (l={l}, m={m})"
        )));
    }
    Ok(spherical_harmonic_unchecked(l, m, dir))
}

pub(crate) fn spherical_harmonic_unchecked(l: u32, m: i32, dir: Direction) -> Complex64 {
    let am = m.unsigned_abs();
    let p = normalized_legendre(l, am, dir.theta.cos());
    let y = Complex64::from_polar(p, f64::from(am as i32) * dir.phi);
    if m >= 0 {
        y
    } else if am % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

/// Real polar factor of `Y_lm`, i.e. `Y_lm(θ, φ) = polar_factor(l, m, θ) e^{imφ}`.
pub(crate) fn harmonic_polar_factor(l: u32, m: i32, cos_theta: f64) -> f64 {
    let am = m.unsigned_abs();
    let p = normalized_legendre(l, am, cos_theta);
    if m < 0 && am % 2 == 1 {
        -p
    } else {
        p
    }
}

/// `∫_0^∞ j_l(x)² dx = π / (2(2l+1))`.
pub fn bessel_square_integral(l: u32) -> f64 {
    PI / (2.0 * f64::from(2 * l + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bessel_at_origin() {
        assert_eq!(spherical_bessel_j(4, 0.0).unwrap(), 0.0);
        assert_eq!(spherical_bessel_j(0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn bessel_small_argument_leading_term() {
        let x: f64 = 1e-3;
        let lead = x.powi(4) / 945.0;
        assert_relative_eq!(spherical_bessel_j(4, x).unwrap(), lead, max_relative = 1e-6);
        assert_relative_eq!(lead, 1.0582e-15, max_relative = 1e-4);
    }

    #[test]
    fn bessel_rejects_bad_input() {
        assert!(spherical_bessel_j(4, -1.0).is_err());
        assert!(spherical_bessel_j(11, 1.0).is_err());
        assert!(spherical_bessel_j(2, f64::NAN).is_err());
    }

    #[test]
    fn branches_agree_at_switch() {
        for l in 0..=MAX_ORDER {
            let xs = series_switch(l);
            for x in [0.9 * xs, xs, 1.1 * xs] {
                let a = bessel_series(l, x);
                let b = bessel_upward(l, x);
                assert_relative_eq!(a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn harmonic_pole_and_equator() {
        let pole = Direction::new(0.0, 1.3).unwrap();
        assert_eq!(spherical_harmonic(4, 2, pole).unwrap().norm(), 0.0);
        let eq = Direction::new(PI / 2.0, 0.0).unwrap();
        let y = spherical_harmonic(4, 2, eq).unwrap();
        let expected = -(3.0 / 8.0) * (5.0 / (2.0 * PI)).sqrt();
        assert_relative_eq!(y.re, expected, max_relative = 1e-14);
        assert!(y.im.abs() < 1e-16);
    }

    #[test]
    fn harmonic_y00_constant() {
        let d = Direction::new(0.7, 4.0).unwrap();
        let y = spherical_harmonic(0, 0, d).unwrap();
        assert_relative_eq!(y.re, 1.0 / (4.0 * PI).sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn harmonic_rejects_bad_m() {
        let d = Direction::new(0.3, 0.0).unwrap();
        assert!(spherical_harmonic(2, 3, d).is_err());
        assert!(spherical_harmonic(11, 0, d).is_err());
    }

    #[test]
    fn direction_validation() {
        assert!(Direction::new(-0.1, 0.0).is_err());
        assert!(Direction::new(4.0, 0.0).is_err());
        let d = Direction::new(1.0, -PI / 2.0).unwrap();
        assert_relative_eq!(d.phi(), 1.5 * PI);
        assert_eq!(wrap_angle(-1e-300), 0.0);
    }

    #[test]
    fn negative_m_relation() {
        let d = Direction::new(1.1, 0.4).unwrap();
        for l in 1..=6u32 {
            for m in 1..=l as i32 {
                let yp = spherical_harmonic(l, m, d).unwrap();
                let yn = spherical_harmonic(l, -m, d).unwrap();
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                assert_relative_eq!(yn.re, sign * yp.conj().re, epsilon = 1e-15);
                assert_relative_eq!(yn.im, sign * yp.conj().im, epsilon = 1e-15);
            }
        }
    }
}
