//! Beyond-mean-field stationarity at fixed total density, critical detunings
//! and phase sweeps.
//!
//! With `∂e_LHY/∂n₂₀ = α` held constant and `∂e_LHY/∂n₁₀` neglected, the
//! energy at fixed `n₀ = n₁₀ + 2n₂₀` is quadratic in `n₂₀` with minimum
//!
//! ```text
//! n₂₀ = (-α - ν + n₀(2g₁ - g₁₂)) / (4g₁ + g₂ - 4g₁₂)
//! ```
//!
//! clipped to `[0, n₀/2]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lhy::{extract_alpha, QuadratureConfig};
use crate::model::{CondensateState, ModelParams, Phase};

/// Relative tolerance (in units of `n₀`) for classifying a density as nonzero.
pub const PHASE_TOL: f64 = 1e-9;

/// Stationary state with the eliminated chemical potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stationarity {
    pub state: CondensateState,
    /// Atomic chemical potential implied by the stationarity conditions.
    pub mu: f64,
    /// `μ₂ = 2μ - ν`.
    pub mu2: f64,
    /// `-μ + g₁n₁₀ + g₁₂n₂₀`.
    pub residual_n10: f64,
    /// `-μ₂ + g₂n₂₀ + g₁₂n₁₀ + α`.
    pub residual_n20: f64,
}

fn check_inputs(params: &ModelParams, n0: f64, alpha: f64) -> Result<()> {
    params.require_mean_field_stable()?;
    if !(n0 > 0.0) || !n0.is_finite() {
        return Err(Error::invalid(format!("total density must be positive, got {n0}")));
    }
    if !(alpha <= 0.0) {
        return Err(Error::invalid(format!("alpha must be nonpositive, got {alpha}")));
    }
    Ok(())
}

fn curvature(params: &ModelParams) -> f64 {
    4.0 * params.g1 + params.g2 - 4.0 * params.g12
}

/// Stationary state at detuning `params.nu` and total density `n0`.
pub fn solve_stationarity(params: &ModelParams, n0: f64, alpha: f64) -> Result<Stationarity> {
    check_inputs(params, n0, alpha)?;
    let (g1, g2, g12, nu) = (params.g1, params.g2, params.g12, params.nu);
    let unclipped = (-alpha - nu + n0 * (2.0 * g1 - g12)) / curvature(params);
    let n20 = unclipped.clamp(0.0, 0.5 * n0);
    let n10 = if n20 == 0.5 * n0 { 0.0 } else { n0 - 2.0 * n20 };
    let state = CondensateState::real(n10, n20)?;
    let mu = if n10 > 0.0 {
        g1 * n10 + g12 * n20
    } else {
        0.5 * (nu + g2 * n20 + g12 * n10 + alpha)
    };
    let mu2 = 2.0 * mu - nu;
    Ok(Stationarity {
        state,
        mu,
        mu2,
        residual_n10: -mu + g1 * n10 + g12 * n20,
        residual_n20: -mu2 + g2 * n20 + g12 * n10 + alpha,
    })
}

/// `(ν_c, ν_c1)`: onset of molecular condensation and disappearance of the atomic one.
pub fn critical_detunings(params: &ModelParams, n0: f64, alpha: f64) -> Result<(f64, f64)> {
    check_inputs(params, n0, alpha)?;
    let a = alpha.abs();
    let nu_c = a + n0 * (2.0 * params.g1 - params.g12);
    let nu_c1 = a - n0 * (0.5 * params.g2 - params.g12);
    Ok((nu_c, nu_c1))
}

/// `n₁₀/n₂₀ = (2ν - 2|α| + n₀(g₂ - 2g₁₂)) / (|α| - ν + n₀(2g₁ - g₁₂))` for `ν_c1 ≤ ν < ν_c`.
pub fn condensate_ratio(params: &ModelParams, n0: f64, alpha: f64, nu: f64) -> Result<f64> {
    let (nu_c, nu_c1) = critical_detunings(params, n0, alpha)?;
    if !(nu >= nu_c1 && nu < nu_c) {
        return Err(Error::Domain(format!(
            "ratio defined for nu in [nu_c1, nu_c) = [{nu_c1}, {nu_c}), got {nu}"
        )));
    }
    let a = alpha.abs();
    let num = 2.0 * nu - 2.0 * a + n0 * (params.g2 - 2.0 * params.g12);
    let den = a - nu + n0 * (2.0 * params.g1 - params.g12);
    Ok(if nu == nu_c1 { 0.0 } else { num / den })
}

/// One control point: either a detuning or a magnetic field, and a total density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlPoint {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub n0: f64,
}

impl ControlPoint {
    pub fn detuning(nu: f64, n0: f64) -> Self {
        Self { nu: Some(nu), b: None, n0 }
    }

    pub fn field(b: f64, n0: f64) -> Self {
        Self { nu: None, b: Some(b), n0 }
    }

    fn resolve(&self, params: &ModelParams) -> Result<(f64, Option<f64>)> {
        match (self.nu, self.b) {
            (Some(nu), None) => Ok((nu, None)),
            (None, Some(b)) => Ok((params.field_map.detuning(b), Some(b))),
            _ => Err(Error::invalid("control point needs exactly one of nu or b")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AlphaMode {
    /// Constant user-supplied α (nonpositive).
    Fixed { alpha: f64 },
    /// α recomputed self-consistently at every point, starting from `initial`.
    Recomputed {
        initial: f64,
        #[serde(default = "default_rel_tol")]
        rel_tol: f64,
        #[serde(default = "default_max_iter")]
        max_iter: usize,
    },
}

fn default_rel_tol() -> f64 {
    1e-6
}

fn default_max_iter() -> usize {
    30
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDiagnostics {
    pub residual_n10: f64,
    pub residual_n20: f64,
    pub mu: f64,
    pub mu2: f64,
    /// False when the point was quarantined.
    pub stable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_spread: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub index: usize,
    pub nu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub n0: f64,
    pub state: CondensateState,
    pub label: Phase,
    pub alpha_used: f64,
    pub diagnostics: PointDiagnostics,
}

fn point_from(index: usize, nu: f64, b: Option<f64>, n0: f64, alpha: f64, st: &Stationarity) -> PhasePoint {
    PhasePoint {
        index,
        nu,
        b,
        n0,
        state: st.state,
        label: Phase::classify(st.state.n10, st.state.n20, PHASE_TOL * n0),
        alpha_used: alpha,
        diagnostics: PointDiagnostics {
            residual_n10: st.residual_n10,
            residual_n20: st.residual_n20,
            mu: st.mu,
            mu2: st.mu2,
            stable: true,
            alpha_spread: None,
            alpha_iterations: None,
            error: None,
        },
    }
}

fn quarantined_point(index: usize, nu: f64, b: Option<f64>, n0: f64, alpha: f64, err: &Error) -> PhasePoint {
    PhasePoint {
        index,
        nu,
        b,
        n0,
        state: CondensateState {
            n10: f64::NAN,
            theta1: 0.0,
            n20: f64::NAN,
            theta2: 0.0,
        },
        label: Phase::Normal,
        alpha_used: alpha,
        diagnostics: PointDiagnostics {
            residual_n10: f64::NAN,
            residual_n20: f64::NAN,
            mu: f64::NAN,
            mu2: f64::NAN,
            stable: false,
            alpha_spread: None,
            alpha_iterations: None,
            error: Some(err.to_string()),
        },
    }
}

fn recompute_alpha(
    params: &ModelParams,
    n0: f64,
    cfg: &QuadratureConfig,
    initial: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Result<(f64, Stationarity, f64, usize)> {
    let mut alpha = initial;
    for iter in 1..=max_iter {
        let st = solve_stationarity(params, n0, alpha)?;
        let local = params.with_mu_nu(st.mu, params.nu);
        let est = extract_alpha(&local, &st.state, cfg)?;
        let next = est.alpha.min(0.0);
        if (next - alpha).abs() <= rel_tol * next.abs().max(f64::MIN_POSITIVE) {
            let st = solve_stationarity(params, n0, next)?;
            return Ok((next, st, est.constancy_spread, iter));
        }
        alpha = next;
    }
    Err(Error::Convergence(format!(
        "alpha iteration did not converge in {max_iter} steps (last {alpha})"
    )))
}

fn sweep_point(template: &ModelParams, index: usize, cp: &ControlPoint, cfg: &QuadratureConfig, mode: AlphaMode) -> PhasePoint {
    let (nu, b) = match cp.resolve(template) {
        Ok(v) => v,
        Err(e) => return quarantined_point(index, cp.nu.unwrap_or(f64::NAN), cp.b, cp.n0, f64::NAN, &e),
    };
    let params = template.with_mu_nu(template.mu, nu);
    match mode {
        AlphaMode::Fixed { alpha } => match solve_stationarity(&params, cp.n0, alpha) {
            Ok(st) => point_from(index, nu, b, cp.n0, alpha, &st),
            Err(e) => quarantined_point(index, nu, b, cp.n0, alpha, &e),
        },
        AlphaMode::Recomputed {
            initial,
            rel_tol,
            max_iter,
        } => match recompute_alpha(&params, cp.n0, cfg, initial, rel_tol, max_iter) {
            Ok((alpha, st, spread, iters)) => {
                let mut p = point_from(index, nu, b, cp.n0, alpha, &st);
                p.diagnostics.alpha_spread = Some(spread);
                p.diagnostics.alpha_iterations = Some(iters);
                p
            }
            Err(e) => quarantined_point(index, nu, b, cp.n0, initial, &e),
        },
    }
}

/// Solve every control point; output order follows the input grid.
///
/// A magnetic field is mapped to `ν` through `template.field_map`; the
/// couplings of `template` are used unchanged. Failing points are kept with
/// `stable = false` and the error message.
pub fn sweep(template: &ModelParams, grid: &[ControlPoint], cfg: &QuadratureConfig, mode: AlphaMode) -> Vec<PhasePoint> {
    grid.par_iter()
        .enumerate()
        .map(|(i, cp)| sweep_point(template, i, cp, cfg, mode))
        .collect()
}

/// Checks that, ordered by decreasing `ν`, the labels form the contiguous
/// blocks ASF → AMSF → MSF with exactly two transitions.
pub fn check_phase_sequence(points: &[PhasePoint]) -> Result<()> {
    let mut ordered: Vec<&PhasePoint> = points.iter().filter(|p| p.diagnostics.stable).collect();
    ordered.sort_by(|a, b| b.nu.total_cmp(&a.nu));
    let mut blocks: Vec<Phase> = Vec::new();
    for p in ordered {
        if blocks.last() != Some(&p.label) {
            blocks.push(p.label);
        }
    }
    if blocks == [Phase::Asf, Phase::Amsf, Phase::Msf] {
        Ok(())
    } else {
        let seq: Vec<&str> = blocks.iter().map(Phase::as_str).collect();
        Err(Error::Domain(format!(
            "expected ASF -> AMSF -> MSF, got {}",
            seq.join(" -> ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params() -> ModelParams {
        ModelParams {
            g12: 0.0,
            ..fixtures::params()
        }
    }

    /// Double-double value `hi + lo` for the oracle's energy comparisons.
    #[derive(Clone, Copy)]
    struct Dd(f64, f64);

    impl Dd {
        fn from(x: f64) -> Self {
            Dd(x, 0.0)
        }

        fn add(self, o: Dd) -> Dd {
            let s = self.0 + o.0;
            let bb = s - self.0;
            let err = (self.0 - (s - bb)) + (o.0 - bb);
            let lo = err + self.1 + o.1;
            let hi = s + lo;
            Dd(hi, lo - (hi - s))
        }

        fn mul(self, o: Dd) -> Dd {
            let p = self.0 * o.0;
            let err = self.0.mul_add(o.0, -p);
            let lo = err + self.0 * o.1 + self.1 * o.0;
            let hi = p + lo;
            Dd(hi, lo - (hi - p))
        }

        fn less(self, o: Dd) -> bool {
            self.0 < o.0 || (self.0 == o.0 && self.1 < o.1)
        }
    }

    /// Golden-section minimization of `e_mf + α n₂₀` on `n₁₀ = n₀ - 2n₂₀`,
    /// with the energy evaluated in double-double arithmetic.
    fn golden_oracle(p: &ModelParams, n0: f64, alpha: f64) -> f64 {
        let energy = |n20: f64| {
            let n2 = Dd::from(n20);
            let n1 = Dd::from(n0).add(Dd::from(-2.0).mul(n2));
            let half = Dd::from(0.5);
            Dd::from(-p.mu1())
                .mul(n1)
                .add(half.mul(Dd::from(p.g1)).mul(n1).mul(n1))
                .add(Dd::from(-p.mu2() + alpha).mul(n2))
                .add(half.mul(Dd::from(p.g2)).mul(n2).mul(n2))
                .add(Dd::from(p.g12).mul(n1).mul(n2))
        };
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (0.0, 0.5 * n0);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (energy(c), energy(d));
        for _ in 0..120 {
            if fc.less(fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = energy(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = energy(d);
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn endpoints_are_exact() {
        let p = params();
        let (n0, alpha) = (2.0, -0.05);
        let (nu_c, nu_c1) = critical_detunings(&p, n0, alpha).unwrap();
        assert_eq!(solve_stationarity(&p.with_mu_nu(0.0, nu_c), n0, alpha).unwrap().state.n20, 0.0);
        let top = solve_stationarity(&p.with_mu_nu(0.0, nu_c1), n0, alpha).unwrap();
        assert_relative_eq!(top.state.n20, 1.0, max_relative = 1e-12);
        assert_eq!(top.state.n10, 0.0);
        assert_eq!(condensate_ratio(&p, n0, alpha, nu_c1).unwrap(), 0.0);
        assert_relative_eq!(nu_c - nu_c1, n0 * (2.0 * p.g1 + 0.5 * p.g2), max_relative = 1e-14);
    }

    #[test]
    fn zero_alpha_limit() {
        let p = ModelParams { g2: 1e-12, ..params() };
        let (nu_c, nu_c1) = critical_detunings(&p, 1.5, 0.0).unwrap();
        assert_relative_eq!(nu_c, 3.0 * p.g1);
        assert!(nu_c1.abs() < 1e-11);
    }

    #[test]
    fn rejects_positive_alpha_and_bad_ratio_domain() {
        let p = params();
        assert!(solve_stationarity(&p, 1.0, 0.1).is_err());
        assert!(solve_stationarity(&p, 0.0, -0.1).is_err());
        let (nu_c, nu_c1) = critical_detunings(&p, 1.0, -0.1).unwrap();
        assert!(condensate_ratio(&p, 1.0, -0.1, nu_c).is_err());
        assert!(condensate_ratio(&p, 1.0, -0.1, nu_c1 - 1e-3).is_err());
    }

    #[test]
    fn residuals_vanish_in_amsf() {
        let p = params();
        let (n0, alpha) = (1.0, -0.2);
        let (nu_c, nu_c1) = critical_detunings(&p, n0, alpha).unwrap();
        let st = solve_stationarity(&p.with_mu_nu(0.0, 0.5 * (nu_c + nu_c1)), n0, alpha).unwrap();
        assert!(st.residual_n10.abs() < 1e-14);
        assert!(st.residual_n20.abs() < 1e-14);
    }

    #[test]
    fn molecular_potential_negative_at_onset() {
        let p = params();
        let (n0, alpha) = (1.0, -0.2);
        let (nu_c, _) = critical_detunings(&p, n0, alpha).unwrap();
        let st = solve_stationarity(&p.with_mu_nu(0.0, nu_c - 1e-6), n0, alpha).unwrap();
        assert!(st.state.n20 > 0.0);
        assert!(st.mu2 < 0.0);
    }

    #[test]
    fn fixed_sweep_has_three_blocks() {
        let p = params();
        let (n0, alpha) = (1.0, -0.2);
        let (nu_c, nu_c1) = critical_detunings(&p, n0, alpha).unwrap();
        let d = 0.1 * (nu_c - nu_c1);
        let grid: Vec<ControlPoint> = (0..41)
            .map(|i| ControlPoint::detuning(nu_c1 - d + (nu_c - nu_c1 + 2.0 * d) * i as f64 / 40.0, n0))
            .collect();
        let cfg = QuadratureConfig::for_params(&p);
        let pts = sweep(&p, &grid, &cfg, AlphaMode::Fixed { alpha });
        assert_eq!(pts.len(), 41);
        assert!(pts.iter().enumerate().all(|(i, p)| p.index == i));
        check_phase_sequence(&pts).unwrap();
    }

    #[test]
    fn field_controls_map_through_detuning() {
        let p = params();
        let b = p.field_map.b0 + 0.5;
        let cfg = QuadratureConfig::for_params(&p);
        let pts = sweep(&p, &[ControlPoint::field(b, 1.0)], &cfg, AlphaMode::Fixed { alpha: -0.1 });
        assert_relative_eq!(pts[0].nu, p.field_map.detuning(b));
        assert_eq!(pts[0].b, Some(b));
    }

    #[test]
    fn bad_control_is_quarantined_not_fatal() {
        let p = params();
        let cfg = QuadratureConfig::for_params(&p);
        let grid = [
            ControlPoint { nu: None, b: None, n0: 1.0 },
            ControlPoint::detuning(0.0, 1.0),
        ];
        let pts = sweep(&p, &grid, &cfg, AlphaMode::Fixed { alpha: -0.1 });
        assert!(!pts[0].diagnostics.stable);
        assert!(pts[1].diagnostics.stable);
    }

    #[test]
    fn empty_sweep() {
        let p = params();
        let cfg = QuadratureConfig::for_params(&p);
        assert!(sweep(&p, &[], &cfg, AlphaMode::Fixed { alpha: -0.1 }).is_empty());
    }

    proptest! {
        #[test]
        fn matches_golden_section(
            lg1 in -1.0f64..1.0, lg2 in -1.0f64..1.0, g12f in -0.5f64..0.5,
            n0 in 0.1f64..5.0, alpha in -1.0f64..0.0, t in -0.2f64..1.2,
        ) {
            let g1 = 10f64.powf(lg1);
            let g2 = 10f64.powf(lg2);
            let p = ModelParams { g1, g2, g12: g12f * (g1 * g2).sqrt(), ..params() };
            let (nu_c, nu_c1) = critical_detunings(&p, n0, alpha).unwrap();
            let nu = nu_c1 + t * (nu_c - nu_c1);
            let q = p.with_mu_nu(0.0, nu);
            let st = solve_stationarity(&q, n0, alpha).unwrap();
            let oracle = golden_oracle(&q, n0, alpha);
            prop_assert!((st.state.n20 - oracle).abs() <= 1e-8 * n0);
            prop_assert!((st.state.n10 + 2.0 * st.state.n20 - n0).abs() <= 1e-12 * n0);
            if t > 0.0 && t < 1.0 {
                let r = condensate_ratio(&p, n0, alpha, nu).unwrap();
                prop_assert!((r - st.state.n10 / st.state.n20).abs() <= 1e-9 * r.abs());
            }
        }
    }
}
