//! End-to-end runs driven by a [`Config`], reporting in laboratory units.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bogoliubov::{bogoliubov_coefficients, excitation_spectrum};
use crate::error::{Error, Result};
use crate::io::{AlphaSettings, Config, SpectrumRow};
use crate::lhy::{check_dalpha_dn10, extract_alpha, lhy_energy_density, AlphaEstimate, LhyResult, QuadratureConfig};
use crate::model::{ModelParams, Phase, QuasiMomentum};
use crate::phase::{
    condensate_ratio, critical_detunings, solve_stationarity, sweep as run_sweep, AlphaMode, ControlPoint, PhasePoint,
    PHASE_TOL,
};
use crate::units::{to_internal, InternalModel, UnitSystem};

/// A config converted to internal units with its resolved quadrature.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: Config,
    pub model: InternalModel,
    pub quadrature: QuadratureConfig,
}

impl Prepared {
    pub fn new(config: Config) -> Result<Self> {
        let model = to_internal(&config.lab)?;
        let quadrature = config.quadrature.resolve(&model.params)?;
        Ok(Self {
            config,
            model,
            quadrature,
        })
    }

    pub fn units(&self) -> &UnitSystem {
        &self.model.ledger.units
    }

    pub fn params(&self) -> &ModelParams {
        &self.model.params
    }

    fn nk(&self, e: f64) -> f64 {
        self.units().energy_to_nk(e)
    }

    fn cm3(&self, n: f64) -> f64 {
        self.units().density_to_cm3(n)
    }
}

/// Excitation spectrum on the configured `(n, k_par, φ)` grid, in row-major order.
pub fn spectrum(prep: &Prepared) -> Result<Vec<SpectrumRow>> {
    let settings = prep
        .config
        .spectrum
        .as_ref()
        .ok_or_else(|| Error::invalid("config has no `spectrum` section"))?;
    let p = prep.params();
    let k_scale = 1.0 / prep.units().per_nm();
    let mut rows = Vec::new();
    for &n in &settings.n_values {
        for k in settings.k_par.values() {
            for j in 0..settings.phi_points {
                let phi = 2.0 * PI * j as f64 / settings.phi_points as f64;
                let q = QuasiMomentum::new(n, k * k_scale, phi)?;
                let block = bogoliubov_coefficients(p, &prep.model.state, &q);
                let e = excitation_spectrum(&block);
                rows.push(SpectrumRow {
                    n,
                    k_par: k,
                    phi,
                    e_plus: prep.nk(e.e_plus),
                    e_minus: prep.nk(e.e_minus),
                    stable: e.stable,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhyReport {
    pub l0_nm: f64,
    pub energy_unit_nk: f64,
    /// `e_LHY` in nK·cm⁻³.
    pub energy_density_nk_cm3: f64,
    pub quadrature: QuadratureConfig,
    /// Internal-unit result with diagnostics.
    pub result: LhyResult,
}

pub fn lhy(prep: &Prepared) -> Result<LhyReport> {
    let result = lhy_energy_density(prep.params(), &prep.model.state, &prep.quadrature)?;
    Ok(LhyReport {
        l0_nm: prep.units().l0 * 1e9,
        energy_unit_nk: prep.model.ledger.energy_unit_nk,
        energy_density_nk_cm3: prep.units().energy_density_to_lab(result.energy_density),
        quadrature: prep.quadrature,
        result,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub alpha_nk: f64,
    pub g_convention: String,
    pub estimate: AlphaEstimate,
    /// `|∂e_LHY/∂n₁₀| / (n₁₀g₁)`; absent when `n₁₀g₁ = 0`.
    pub atomic_ratio: Option<f64>,
    pub atomic_derivative_nk: f64,
}

pub fn alpha(prep: &Prepared) -> Result<AlphaReport> {
    let (p, s, cfg) = (prep.params(), &prep.model.state, &prep.quadrature);
    let estimate = extract_alpha(p, s, cfg)?;
    let atomic = check_dalpha_dn10(p, s, cfg)?;
    Ok(AlphaReport {
        alpha_nk: prep.nk(estimate.alpha),
        g_convention: prep.model.ledger.g_convention.clone(),
        estimate,
        atomic_ratio: atomic.ratio,
        atomic_derivative_nk: prep.nk(atomic.derivative),
    })
}

/// `α` in internal units: the configured constant, or computed at the configured state.
pub fn resolve_alpha(prep: &Prepared) -> Result<f64> {
    match prep.config.alpha {
        Some(AlphaSettings::Fixed { alpha_nk }) => Ok(alpha_nk * prep.units().per_nanokelvin()),
        Some(AlphaSettings::Recomputed { .. }) | None => {
            Ok(extract_alpha(prep.params(), &prep.model.state, &prep.quadrature)?.alpha)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub alpha_nk: f64,
    pub nu_nk: f64,
    pub b_gauss: f64,
    pub n0_cm3: f64,
    pub n10_cm3: f64,
    pub n20_cm3: f64,
    pub label: Phase,
    pub mu_nk: f64,
    pub mu2_nk: f64,
    pub residual_n10_nk: f64,
    pub residual_n20_nk: f64,
}

pub fn stationarity(prep: &Prepared) -> Result<StationarityReport> {
    let alpha = resolve_alpha(prep)?;
    let (p, n0) = (prep.params(), prep.model.n0);
    let st = solve_stationarity(p, n0, alpha)?;
    Ok(StationarityReport {
        alpha_nk: prep.nk(alpha),
        nu_nk: prep.nk(p.nu),
        b_gauss: prep.config.lab.b,
        n0_cm3: prep.cm3(n0),
        n10_cm3: prep.cm3(st.state.n10),
        n20_cm3: prep.cm3(st.state.n20),
        label: Phase::classify(st.state.n10, st.state.n20, PHASE_TOL * n0),
        mu_nk: prep.nk(st.mu),
        mu2_nk: prep.nk(st.mu2),
        residual_n10_nk: prep.nk(st.residual_n10),
        residual_n20_nk: prep.nk(st.residual_n20),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub alpha_nk: f64,
    pub n0_cm3: f64,
    pub nu_c_nk: f64,
    pub nu_c1_nk: f64,
    pub b_c_gauss: f64,
    pub b_c1_gauss: f64,
}

pub fn critical(prep: &Prepared) -> Result<CriticalReport> {
    let alpha = resolve_alpha(prep)?;
    let (p, n0) = (prep.params(), prep.model.n0);
    let (nu_c, nu_c1) = critical_detunings(p, n0, alpha)?;
    Ok(CriticalReport {
        alpha_nk: prep.nk(alpha),
        n0_cm3: prep.cm3(n0),
        nu_c_nk: prep.nk(nu_c),
        nu_c1_nk: prep.nk(nu_c1),
        b_c_gauss: p.field_map.field_for_detuning(nu_c),
        b_c1_gauss: p.field_map.field_for_detuning(nu_c1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub alpha_nk: f64,
    pub nu_nk: f64,
    pub ratio: f64,
}

pub fn ratio(prep: &Prepared) -> Result<RatioReport> {
    let alpha = resolve_alpha(prep)?;
    let p = prep.params();
    let r = condensate_ratio(p, prep.model.n0, alpha, p.nu)?;
    Ok(RatioReport {
        alpha_nk: prep.nk(alpha),
        nu_nk: prep.nk(p.nu),
        ratio: r,
    })
}

/// Sweep over the configured controls. Requires an `alpha` section.
pub fn sweep(prep: &Prepared) -> Result<Vec<PhasePoint>> {
    let settings = prep
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::invalid("config has no `sweep` section"))?;
    let u = prep.units();
    let per_nk = u.per_nanokelvin();
    let mode = match prep.config.alpha {
        Some(AlphaSettings::Fixed { alpha_nk }) => AlphaMode::Fixed { alpha: alpha_nk * per_nk },
        Some(AlphaSettings::Recomputed {
            initial_nk,
            rel_tol,
            max_iter,
        }) => AlphaMode::Recomputed {
            initial: initial_nk * per_nk,
            rel_tol: rel_tol.unwrap_or(1e-6),
            max_iter: max_iter.unwrap_or(30),
        },
        None => return Err(Error::invalid("sweep needs an `alpha` section")),
    };
    let grid: Vec<ControlPoint> = settings
        .controls()
        .iter()
        .map(|c| ControlPoint {
            nu: c.nu_nk.map(|v| v * per_nk),
            b: c.b,
            n0: c.n0 * u.per_inverse_cm3(),
        })
        .collect();
    Ok(run_sweep(prep.params(), &grid, &prep.quadrature, mode))
}
