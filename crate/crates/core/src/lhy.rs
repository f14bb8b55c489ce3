//! Regularized Lee-Huang-Yang energy density of the quasi-2D gas.
//!
//! All quantities are dimensionless: momenta in `1/l₀`, energies in
//! `ħ²/(m l₀²)`, `g'_σ = n_σ0 g_σ l₀²`, `l = 2L/l₀`. The energy density is
//!
//! ```text
//! e_LHY = 1/(2(2π)² l) ∫₀^Λ k dk ∫₀^{2π} dφ Σ_{n,σ} (E_nσ - ε̃_nσ) + Σ_σ σ m g'_σ² Λ/(8π)
//! ```
//!
//! The radial integral uses composite Gauss-Legendre panels (geometric near
//! the origin, uniform above), the azimuth an equispaced trapezoid rule and
//! the z-modes a direct symmetric sum over `|n| ≤ n_max`. Two analytic
//! remainders complete the mode sum:
//!
//! * modes `|n| > n_max` below the cutoff, through their leading `-σ m g'_σ²/x`
//!   behaviour and the identity `Σ'_{n≠0} k/(k² + (2πn/l)²) = (l/2)coth(kl/2) - 1/k`;
//! * the resonance-vertex pairing `-m|2VΨ₂₀|²/k²` outside the sampled
//!   region, which decays only like `1/k⁴` and is not covered by the
//!   counterterm.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::{zero_point_shift, BogoliubovBlock};
use crate::error::{Error, Result};
use crate::model::{CondensateState, ModelParams, VertexShape};
use crate::quadrature::{uniform_breaks, CompositeRule, NeumaierSum};
use crate::special::{bessel_square_integral, harmonic_polar_factor, spherical_bessel_unchecked};

/// Default cutoff in units of `l₀/|r̃₀|`.
pub const DEFAULT_CUTOFF_FACTOR: f64 = 20.0;
/// Smallest admissible cutoff in units of `l₀/|r̃₀|`.
pub const MIN_CUTOFF_FACTOR: f64 = 10.0;
/// Number of geometrically graded panels between the origin and the first uniform panel.
const GEOMETRIC_PANELS: i32 = 36;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Radial cutoff `Λ` (units of `1/l₀`).
    pub lambda_cut: f64,
    /// z-modes `|n| ≤ n_max` are summed directly.
    pub n_max: usize,
    /// Gauss-Legendre order on each radial panel.
    pub radial_points: usize,
    pub azimuthal_points: usize,
    /// Relative finite-difference step for density derivatives.
    pub fd_step: f64,
}

impl QuadratureConfig {
    /// `Λ = 20 l₀/|r̃₀|`, `n_max = ⌈lΛ/π⌉ + 8`, 12 radial points per panel, 32 azimuthal points.
    pub fn for_params(params: &ModelParams) -> Self {
        let lambda_cut = DEFAULT_CUTOFF_FACTOR / params.r0_tilde;
        Self {
            lambda_cut,
            n_max: default_n_max(params, lambda_cut),
            radial_points: 12,
            azimuthal_points: 32,
            fd_step: 1e-3,
        }
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        let min_cut = MIN_CUTOFF_FACTOR / params.r0_tilde;
        if !(self.lambda_cut >= min_cut) {
            return Err(Error::invalid(format!(
                "lambda_cut = {} must be at least {MIN_CUTOFF_FACTOR} l0/|r0| = {min_cut}",
                self.lambda_cut
            )));
        }
        let l = params.box_parameter();
        if PI * self.n_max as f64 / l <= self.lambda_cut {
            return Err(Error::invalid(format!(
                "n_max = {} too small: need pi*n_max/l > lambda_cut (l = {l}, lambda_cut = {})",
                self.n_max, self.lambda_cut
            )));
        }
        if self.radial_points < 2 {
            return Err(Error::invalid("radial_points must be at least 2"));
        }
        let min_phi = match params.vertex {
            VertexShape::PartialWave { m, .. } => 4 * m.unsigned_abs() as usize + 1,
            VertexShape::Constant => 1,
        };
        if self.azimuthal_points < min_phi.max(1) {
            return Err(Error::invalid(format!(
                "azimuthal_points must be at least {min_phi} to resolve the vertex harmonics"
            )));
        }
        if !(self.fd_step > 0.0 && self.fd_step < 0.25) {
            return Err(Error::invalid("fd_step must lie in (0, 0.25)"));
        }
        Ok(())
    }

    /// Same grid density with the cutoff doubled; `n_max` grows if needed to stay admissible.
    pub fn with_doubled_cutoff(&self, params: &ModelParams) -> Self {
        let lambda_cut = 2.0 * self.lambda_cut;
        Self {
            lambda_cut,
            n_max: self.n_max.max(default_n_max(params, lambda_cut)),
            ..*self
        }
    }

    pub fn with_doubled_modes(&self) -> Self {
        Self {
            n_max: 2 * self.n_max,
            ..*self
        }
    }
}

pub fn default_n_max(params: &ModelParams, lambda_cut: f64) -> usize {
    (params.box_parameter() * lambda_cut / PI).ceil() as usize + 8
}

/// Components of one evaluation of the regularized energy density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LhyEvaluation {
    pub energy_density: f64,
    /// Sampled integral over `k < Λ`, `|n| ≤ n_max`.
    pub integral: f64,
    /// Leading-order contribution of the modes `|n| > n_max` below the cutoff.
    pub mode_remainder: f64,
    /// Resonance pairing outside the sampled region.
    pub vertex_remainder: f64,
    /// `Σ_σ σ m g'_σ² Λ/(8π)`.
    pub counterterm: f64,
    pub unstable_modes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LhyResult {
    pub energy_density: f64,
    pub counterterm: f64,
    pub integral: f64,
    pub mode_remainder: f64,
    pub vertex_remainder: f64,
    /// `e(2 n_max) - e`.
    pub truncation_estimate: f64,
    /// `e(2Λ) - e`.
    pub cutoff_estimate: f64,
    pub unstable_modes: usize,
    /// Reference length in units of `|r̃₀|`.
    pub l0_over_r0: f64,
}

/// Per-mode quantities that do not depend on the azimuth.
struct ModeKernel<'a> {
    params: &'a ModelParams,
    psi1: Complex64,
    psi2: Complex64,
    lambda_bg: Complex64,
    lambda2: Complex64,
    shift1: f64,
    shift2: f64,
    harmonics: Vec<Complex64>,
    azimuth_weight: f64,
}

impl<'a> ModeKernel<'a> {
    fn new(params: &'a ModelParams, state: &CondensateState, azimuthal_points: usize) -> Self {
        let psi1 = state.psi1();
        let psi2 = state.psi2();
        let m = match params.vertex {
            VertexShape::PartialWave { m, .. } => m,
            VertexShape::Constant => 0,
        };
        let harmonics = (0..azimuthal_points)
            .map(|j| {
                let phi = 2.0 * PI * j as f64 / azimuthal_points as f64;
                Complex64::from_polar(1.0, -(m as f64) * phi)
            })
            .collect();
        Self {
            params,
            psi1,
            psi2,
            lambda_bg: params.g1 * psi1 * psi1,
            lambda2: params.g2 * psi2 * psi2,
            shift1: -params.mu1() + 2.0 * params.g1 * state.n10,
            shift2: -params.mu2() + 2.0 * params.g2 * state.n20,
            harmonics,
            azimuth_weight: 2.0 * PI / azimuthal_points as f64,
        }
    }

    /// `∫dφ Σ_σ (E_σ - ε̃_σ)` at one `(k_z, k_par)`, and the number of unstable azimuths.
    fn azimuthal_integral(&self, kz: f64, kp: f64) -> (f64, usize) {
        let p = self.params;
        let k2 = kz * kz + kp * kp;
        let eps1 = p.kinetic(k2, 1) + self.shift1;
        let eps2 = p.kinetic(k2, 2) + self.shift2;
        let (full, half) = match p.vertex {
            VertexShape::Constant => (p.g, p.g),
            VertexShape::PartialWave { l, m } => {
                let kmag = k2.sqrt();
                let polar = harmonic_polar_factor(l, m, kz / kmag);
                let jf = spherical_bessel_unchecked(l, p.r0_tilde * kmag);
                let jh = spherical_bessel_unchecked(l, 0.5 * p.r0_tilde * kmag);
                (p.g * jf * polar, p.g * jh * polar)
            }
        };
        let pair = 2.0 * full * self.psi2;
        let hop = 2.0 * half * self.psi1.conj();
        let isotropic = matches!(p.vertex, VertexShape::Constant) || (pair == Complex64::new(0.0, 0.0) && hop == Complex64::new(0.0, 0.0));
        if isotropic {
            let block = BogoliubovBlock::new(eps1, eps2, self.lambda_bg + pair, self.lambda2, hop);
            return match zero_point_shift(&block) {
                Some(v) => (2.0 * PI * v, 0),
                None => (0.0, self.harmonics.len()),
            };
        }
        let mut acc = NeumaierSum::default();
        let mut unstable = 0;
        for h in &self.harmonics {
            let block = BogoliubovBlock::new(eps1, eps2, self.lambda_bg + pair * h, self.lambda2, hop * h);
            match zero_point_shift(&block) {
                Some(v) => acc.add(v),
                None => unstable += 1,
            }
        }
        (self.azimuth_weight * acc.value(), unstable)
    }
}

fn radial_rule(params: &ModelParams, cfg: &QuadratureConfig) -> CompositeRule {
    let width = (1.0 / params.r0_tilde).min(1.0).min(cfg.lambda_cut);
    let mut breaks = vec![0.0];
    for i in (1..=GEOMETRIC_PANELS).rev() {
        breaks.push(width * 0.5f64.powi(i));
    }
    breaks.extend(uniform_breaks(width, cfg.lambda_cut, width));
    CompositeRule::on_breaks(&breaks, cfg.radial_points)
}

/// `Σ'_{n≠0} k/(k² + (2πn/l)²) = (l/2)coth(kl/2) - 1/k`.
pub fn coth_tail(l: f64, k: f64) -> f64 {
    let y = 0.5 * k * l;
    if y < 1e-3 {
        let y2 = y * y;
        0.5 * l * y * (1.0 / 3.0 - y2 / 45.0 + 2.0 * y2 * y2 / 945.0)
    } else {
        0.5 * l / y.tanh() - 1.0 / k
    }
}

/// Direct summation of `Σ'_{n≠0} k/(k² + (2πn/l)²)` to convergence.
///
/// The terms are summed pairwise from `|n| = 1` outward; once `2πn/l ≥ 10k'`
/// the remaining tail is added through its midpoint Euler-Maclaurin expansion,
/// stopping when the first neglected correction is below `1e-17` of the sum.
pub fn tail_identity_check(l: f64, k_prime: f64) -> Result<f64> {
    if !(l > 0.0) || !(k_prime > 0.0) {
        return Err(Error::Domain(format!(
            "tail identity requires l > 0 and k' > 0, got ({l}, {k_prime})"
        )));
    }
    let a = 2.0 * PI / l;
    let term = |n: f64| k_prime / (k_prime * k_prime + a * a * n * n);
    let mut sum = NeumaierSum::default();
    let mut n = 1u64;
    loop {
        sum.add(2.0 * term(n as f64));
        let t = n as f64 + 0.5;
        let x = a * t / k_prime;
        // |7 f'''(t)/5760| for f(t) = 2k/(k² + a²t²) with at ≫ k
        let neglected = 0.06 * k_prime / (a * a * t.powi(5));
        if (x >= 10.0 && neglected < 1e-17 * sum.value()) || n >= 50_000_000 {
            // ∫_{n+1/2}^∞ f dt plus the first midpoint correction f'(t)/24
            let tail = 2.0 / a * (0.5 * PI - x.atan());
            let d1 = -2.0 * 2.0 * k_prime * a * a * t / (k_prime * k_prime + a * a * t * t).powi(2);
            sum.add(tail + d1 / 24.0);
            break;
        }
        n += 1;
    }
    Ok(sum.value())
}

/// Integrand remainder for `|n| > n_max`: `Σ_{|n|>N} k/(k² + (2πn/l)²)`.
fn mode_tail(l: f64, k: f64, partial: f64) -> f64 {
    (coth_tail(l, k) - partial).max(0.0)
}

fn evaluate_integral(params: &ModelParams, state: &CondensateState, cfg: &QuadratureConfig) -> (f64, f64, usize) {
    let kernel = ModeKernel::new(params, state, cfg.azimuthal_points);
    let rule = radial_rule(params, cfg);
    let l = params.box_parameter();
    let a = 2.0 * PI / l;
    let n_max = cfg.n_max as i64;
    let folded = params.vertex.reflection_even();
    let c_sum = params.m * ((params.g1 * state.n10).powi(2) + 2.0 * (params.g2 * state.n20).powi(2));

    let per_node: Vec<(f64, f64, usize)> = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(&k, &w)| {
            let mut modes = NeumaierSum::default();
            let mut partial = NeumaierSum::default();
            let mut unstable = 0;
            let n_range: Box<dyn Iterator<Item = i64>> = if folded {
                Box::new(0..=n_max)
            } else {
                Box::new(-n_max..=n_max)
            };
            for n in n_range {
                let kz = a * n as f64;
                let (v, bad) = kernel.azimuthal_integral(kz, k);
                unstable += bad;
                let mult = if folded && n != 0 { 2.0 } else { 1.0 };
                modes.add(mult * v);
                if n > 0 {
                    partial.add(2.0 * k / (k * k + kz * kz));
                }
            }
            let remainder = -2.0 * PI * c_sum * mode_tail(l, k, partial.value());
            (w * k * modes.value(), w * remainder, unstable)
        })
        .collect();

    let pref = 1.0 / (2.0 * (2.0 * PI).powi(2) * l);
    let integral: NeumaierSum = per_node.iter().map(|r| r.0).collect();
    let remainder: NeumaierSum = per_node.iter().map(|r| r.1).collect();
    let unstable = per_node.iter().map(|r| r.2).sum();
    (pref * integral.value(), pref * remainder.value(), unstable)
}

/// `∫ dk j_l(r₀k)² A(k)` over momenta outside the sampled cylinder
/// `{k_par < Λ, |k_z| < K_z}`, where `A(k)` is the fraction of `|Y_lm|²`
/// weight on the sphere of radius `k` lying outside it.
fn vertex_outside_integral(l: u32, m: i32, r0: f64, lambda: f64, kz_edge: f64) -> f64 {
    let polar_rule = CompositeRule::on_breaks(&[0.0, 1.0], l as usize + 2);
    let weight_between = |lo: f64, hi: f64| -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let span = hi - lo;
        polar_rule.integrate(|t| {
            let u = lo + span * t;
            let p = harmonic_polar_factor(l, m, u);
            span * 2.0 * PI * p * p
        })
    };
    let outside_fraction = |k: f64| -> f64 {
        let u_lo = (1.0 - (lambda / k).powi(2)).max(0.0).sqrt();
        let u_hi = (kz_edge / k).min(1.0);
        (1.0 - 2.0 * weight_between(u_lo, u_hi)).max(0.0)
    };
    let k_start = lambda.min(kz_edge);
    let k_full = lambda.hypot(kz_edge);
    let width = (1.0 / r0).min(1.0);
    let mut breaks = uniform_breaks(k_start, lambda.max(kz_edge), width);
    breaks.extend(uniform_breaks(lambda.max(kz_edge), k_full, width).into_iter().skip(1));
    let shell = CompositeRule::on_breaks(&breaks, 12).integrate(|k| {
        let j = spherical_bessel_unchecked(l, r0 * k);
        j * j * outside_fraction(k)
    });
    let x_full = r0 * k_full;
    let inner = CompositeRule::on_breaks(&uniform_breaks(0.0, x_full, 1.0), 12).integrate(|x| {
        let j = spherical_bessel_unchecked(l, x);
        j * j
    });
    shell + (bessel_square_integral(l) - inner) / r0
}

fn evaluate(params: &ModelParams, state: &CondensateState, cfg: &QuadratureConfig) -> LhyEvaluation {
    let (integral, mode_remainder, unstable_modes) = evaluate_integral(params, state, cfg);
    let g1p = params.g1 * state.n10;
    let g2p = params.g2 * state.n20;
    let counterterm = params.m * (g1p * g1p + 2.0 * g2p * g2p) * cfg.lambda_cut / (8.0 * PI);
    let vertex_remainder = match params.vertex {
        VertexShape::PartialWave { l, m } if params.g > 0.0 && state.n20 > 0.0 => {
            let kz_edge = 2.0 * PI * (cfg.n_max as f64 + 0.5) / params.box_parameter();
            let outside = vertex_outside_integral(l, m, params.r0_tilde, cfg.lambda_cut, kz_edge);
            -2.0 * params.m * params.g * params.g * state.n20 / (2.0 * PI).powi(3) * outside
        }
        _ => 0.0,
    };
    LhyEvaluation {
        energy_density: integral + mode_remainder + vertex_remainder + counterterm,
        integral,
        mode_remainder,
        vertex_remainder,
        counterterm,
        unstable_modes,
    }
}

/// One evaluation on the configured grid. Unstable grid modes quarantine the result.
pub fn lhy_energy_value(params: &ModelParams, state: &CondensateState, cfg: &QuadratureConfig) -> Result<LhyEvaluation> {
    params.validate()?;
    cfg.validate(params)?;
    let ev = evaluate(params, state, cfg);
    if ev.unstable_modes > 0 {
        return Err(Error::Quarantined {
            unstable_modes: ev.unstable_modes,
        });
    }
    Ok(ev)
}

/// Number of grid points `(k, n, φ)` whose Bogoliubov spectrum is unstable.
pub fn count_unstable_modes(params: &ModelParams, state: &CondensateState, cfg: &QuadratureConfig) -> Result<usize> {
    params.validate()?;
    cfg.validate(params)?;
    Ok(evaluate_integral(params, state, cfg).2)
}

/// Energy density with truncation and cutoff diagnostics (three grid evaluations).
pub fn lhy_energy_density(params: &ModelParams, state: &CondensateState, cfg: &QuadratureConfig) -> Result<LhyResult> {
    let base = lhy_energy_value(params, state, cfg)?;
    let more_modes = lhy_energy_value(params, state, &cfg.with_doubled_modes())?;
    let more_cut = lhy_energy_value(params, state, &cfg.with_doubled_cutoff(params))?;
    Ok(LhyResult {
        energy_density: base.energy_density,
        counterterm: base.counterterm,
        integral: base.integral,
        mode_remainder: base.mode_remainder,
        vertex_remainder: base.vertex_remainder,
        truncation_estimate: more_modes.energy_density - base.energy_density,
        cutoff_estimate: more_cut.energy_density - base.energy_density,
        unstable_modes: 0,
        l0_over_r0: 1.0 / params.r0_tilde,
    })
}

/// `∂e_LHY/∂n₂₀` with its finite-difference diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub alpha: f64,
    /// Difference between the Richardson value and the finer plain difference.
    pub richardson_delta: f64,
    /// `(max - min)/|α|` of the derivative sampled at `n₂₀/√10`, `n₂₀`, `√10 n₂₀`.
    pub constancy_spread: f64,
    /// Density at which the derivative was taken.
    pub n20: f64,
}

#[derive(Debug, Clone, Copy)]
enum Axis {
    Atoms,
    Molecules,
}

fn energy_at(params: &ModelParams, state: &CondensateState, cfg: &QuadratureConfig, axis: Axis, value: f64) -> Result<f64> {
    let s = match axis {
        Axis::Atoms => state.with_densities(value, state.n20)?,
        Axis::Molecules => state.with_densities(state.n10, value)?,
    };
    Ok(lhy_energy_value(params, &s, cfg)?.energy_density)
}

/// Second-order difference at `x` with step `h`: central when `x ≥ 2h`, forward otherwise.
fn difference(params: &ModelParams, state: &CondensateState, cfg: &QuadratureConfig, axis: Axis, x: f64, h: f64) -> Result<f64> {
    let e = |v: f64| energy_at(params, state, cfg, axis, v);
    if x >= 2.0 * h {
        Ok((e(x + h)? - e(x - h)?) / (2.0 * h))
    } else {
        Ok((-3.0 * e(x)? + 4.0 * e(x + h)? - e(x + 2.0 * h)?) / (2.0 * h))
    }
}

fn richardson(params: &ModelParams, state: &CondensateState, cfg: &QuadratureConfig, axis: Axis, x: f64, h: f64) -> Result<(f64, f64)> {
    let coarse = difference(params, state, cfg, axis, x, h)?;
    let fine = difference(params, state, cfg, axis, x, 0.5 * h)?;
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    Ok((extrapolated, (extrapolated - fine).abs()))
}

/// `α = ∂e_LHY/∂n₂₀` at fixed chemical potential and detuning.
///
/// Central differences with relative step `fd_step` and one Richardson level;
/// at `n₂₀ = 0` a forward stencil with step `fd_step · 10⁻³ n₀` is used.
pub fn extract_alpha(params: &ModelParams, state: &CondensateState, cfg: &QuadratureConfig) -> Result<AlphaEstimate> {
    let scale = if state.n20 > 0.0 {
        state.n20
    } else {
        1e-3 * state.total_density()
    };
    if !(scale > 0.0) {
        return Err(Error::Domain("alpha needs a nonzero condensate density".into()));
    }
    let h = cfg.fd_step * scale;
    let (alpha, richardson_delta) = richardson(params, state, cfg, Axis::Molecules, state.n20, h)?;

    let decade = 10f64.sqrt();
    let mut samples = vec![alpha];
    for factor in [1.0 / decade, decade] {
        let x = scale * factor;
        samples.push(difference(params, state, cfg, Axis::Molecules, x, cfg.fd_step * x)?);
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(AlphaEstimate {
        alpha,
        richardson_delta,
        constancy_spread: (hi - lo) / alpha.abs(),
        n20: state.n20,
    })
}

/// Size of `∂e_LHY/∂n₁₀` relative to the mean-field term `n₁₀g₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomicSensitivity {
    pub derivative: f64,
    /// `None` when `n₁₀g₁` vanishes and the ratio is undefined.
    pub ratio: Option<f64>,
}

pub fn check_dalpha_dn10(params: &ModelParams, state: &CondensateState, cfg: &QuadratureConfig) -> Result<AtomicSensitivity> {
    let scale = if state.n10 > 0.0 {
        state.n10
    } else {
        1e-3 * state.total_density()
    };
    if !(scale > 0.0) {
        return Err(Error::Domain("atomic derivative needs a nonzero condensate density".into()));
    }
    let (derivative, _) = richardson(params, state, cfg, Axis::Atoms, state.n10, cfg.fd_step * scale)?;
    let mf = state.n10 * params.g1;
    let ratio = (mf.abs() > 0.0).then(|| derivative.abs() / mf.abs());
    Ok(AtomicSensitivity { derivative, ratio })
}

/// Smallest resonance coupling `g ≤ g_max` at which some grid mode becomes
/// unstable, located by bisection to relative width `rel_tol`. `None` when
/// the grid is still stable at `g_max`.
pub fn instability_threshold(
    params: &ModelParams,
    state: &CondensateState,
    cfg: &QuadratureConfig,
    g_max: f64,
    rel_tol: f64,
) -> Result<Option<f64>> {
    if !(g_max > 0.0) || !(rel_tol > 0.0) {
        return Err(Error::invalid("instability scan needs g_max > 0 and rel_tol > 0"));
    }
    let unstable = |g: f64| count_unstable_modes(&params.with_g(g), state, cfg).map(|n| n > 0);
    if unstable(0.0)? {
        return Err(Error::invalid("grid is unstable already at g = 0"));
    }
    if !unstable(g_max)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, g_max);
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if unstable(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}
