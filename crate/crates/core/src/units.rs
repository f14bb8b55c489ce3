//! Laboratory units ↔ internal natural units.
//!
//! Internally `ħ = 1`, the atom mass is 1 and lengths are measured in `l₀`
//! (default `l₀ = |r̃₀|`). The energy unit is `E₀ = ħ²/(m l₀²)`.
//!
//! The resonance coupling is quoted in `μm^{-1/2}`, which is its dimension
//! in `ħ = m = 1` units: `g_lab = g_res ħ²/m · μm^{-1/2}`. Hence
//! `g_int = g_res · (l₀/μm)^{1/2}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CondensateState, FieldMap, ModelParams, VertexShape};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Mass of ¹³³Cs in atomic mass units.
pub const CESIUM_133_AMU: f64 = 132.905_451_961;

const NM: f64 = 1e-9;
const UM: f64 = 1e-6;
const CM3_TO_M3: f64 = 1e6;
const NANOKELVIN: f64 = 1e-9;
const KHZ: f64 = 1e3;

/// Atomic chemical potential: explicit (nK) or the atomic mean-field value `n₁₀g₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChemicalPotential {
    NanoKelvin(f64),
    Rule(MuRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuRule {
    MeanField,
}

/// Physical inputs in laboratory units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabParams {
    /// Atom mass, u.
    pub mass_amu: f64,
    /// Background atomic scattering length, a₀.
    pub a1_bg: f64,
    /// Molecular scattering length, a₀.
    pub a2: f64,
    /// Atom-molecule scattering length, a₀.
    pub a12: f64,
    /// Magnetic field, G.
    pub b: f64,
    /// Resonance position, G.
    pub b0: f64,
    /// Resonance width, G.
    pub delta_b: f64,
    /// Relative magnetic moment, kHz/G (in units of h).
    pub delta_mu: f64,
    /// Resonance coupling, μm^{-1/2}.
    pub g_res: f64,
    /// Atomic condensate density, cm⁻³.
    pub n10: f64,
    /// Molecular condensate density, cm⁻³.
    pub n20: f64,
    /// Total condensed density `n₁₀ + 2n₂₀` for fixed-density solves, cm⁻³.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,
    /// Box half-height, μm.
    pub half_length: f64,
    /// Molecular size, nm.
    pub r0_tilde: f64,
    /// Reference length, nm. Defaults to `r0_tilde`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<f64>,
    pub chemical_potential: ChemicalPotential,
    #[serde(default)]
    pub vertex: VertexShape,
}

/// Scale factors between laboratory and internal units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    /// Reference length, m.
    pub l0: f64,
    /// Atom mass, kg.
    pub mass: f64,
}

impl UnitSystem {
    /// Energy unit `ħ²/(m l₀²)`, J.
    pub fn energy(&self) -> f64 {
        HBAR * HBAR / (self.mass * self.l0 * self.l0)
    }

    /// Internal energy per nK.
    pub fn per_nanokelvin(&self) -> f64 {
        BOLTZMANN * NANOKELVIN / self.energy()
    }

    /// Internal density per cm⁻³.
    pub fn per_inverse_cm3(&self) -> f64 {
        CM3_TO_M3 * self.l0.powi(3)
    }

    /// Internal length per nm.
    pub fn per_nm(&self) -> f64 {
        NM / self.l0
    }

    /// Internal coupling per `μm^{-1/2}`.
    pub fn per_sqrt_inverse_um(&self) -> f64 {
        (self.l0 / UM).sqrt()
    }

    /// Internal energy per kHz·h.
    pub fn per_khz(&self) -> f64 {
        PLANCK * KHZ / self.energy()
    }

    pub fn energy_to_nk(&self, e: f64) -> f64 {
        e / self.per_nanokelvin()
    }

    pub fn density_to_cm3(&self, n: f64) -> f64 {
        n / self.per_inverse_cm3()
    }

    /// Internal energy density to nK·cm⁻³.
    pub fn energy_density_to_lab(&self, e: f64) -> f64 {
        e / (self.per_nanokelvin() * self.per_inverse_cm3())
    }
}

/// One conversion step: `internal = lab × factor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub quantity: String,
    pub lab_value: f64,
    pub lab_unit: String,
    pub factor: f64,
    pub internal_value: f64,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionLedger {
    pub units: UnitSystem,
    pub energy_unit_joule: f64,
    pub energy_unit_nk: f64,
    pub g_convention: String,
    pub entries: Vec<LedgerEntry>,
}

impl ConversionLedger {
    fn push(&mut self, quantity: &str, lab_value: f64, lab_unit: &str, factor: f64, rule: &str) -> f64 {
        let internal_value = lab_value * factor;
        self.entries.push(LedgerEntry {
            quantity: quantity.into(),
            lab_value,
            lab_unit: lab_unit.into(),
            factor,
            internal_value,
            rule: rule.into(),
        });
        internal_value
    }

    pub fn entry(&self, quantity: &str) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.quantity == quantity)
    }

    /// Recomputes every entry from its lab value and factor; true when all match bit for bit.
    pub fn replay(&self) -> bool {
        self.entries
            .iter()
            .all(|e| (e.lab_value * e.factor).to_bits() == e.internal_value.to_bits())
    }
}

pub const G_CONVENTION: &str =
    "g_res in um^-1/2 read in hbar = m = 1 units: g = g_res * hbar^2/m * um^-1/2, g_int = g_res * sqrt(l0/um)";

/// Result of [`to_internal`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalModel {
    pub params: ModelParams,
    pub state: CondensateState,
    /// Total density for fixed-density solves.
    pub n0: f64,
    pub ledger: ConversionLedger,
}

/// `a₁ = a₁,bg (1 - ΔB/(B - B₀))`, in the units of `a1_bg`.
pub fn resonant_scattering_length(a1_bg: f64, b: f64, b0: f64, delta_b: f64) -> Result<f64> {
    if b == b0 {
        return Err(Error::Domain(format!("scattering length has a pole at B = B0 = {b0} G")));
    }
    Ok(a1_bg * (1.0 - delta_b / (b - b0)))
}

impl LabParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass_amu", self.mass_amu),
            ("delta_b", self.delta_b),
            ("delta_mu", self.delta_mu),
            ("half_length", self.half_length),
            ("r0_tilde", self.r0_tilde),
            ("b", self.b),
            ("b0", self.b0),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let nonnegative = [("g_res", self.g_res), ("n10", self.n10), ("n20", self.n20)];
        for (name, v) in nonnegative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be nonnegative and finite, got {v}")));
            }
        }
        for (name, v) in [("a1_bg", self.a1_bg), ("a2", self.a2), ("a12", self.a12)] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite")));
            }
        }
        if let Some(n0) = self.n0 {
            if !(n0 > 0.0) || !n0.is_finite() {
                return Err(Error::invalid(format!("n0 must be positive and finite, got {n0}")));
            }
        }
        if let Some(l0) = self.l0 {
            if !(l0 > 0.0) || !l0.is_finite() {
                return Err(Error::invalid(format!("l0 must be positive and finite, got {l0}")));
            }
        }
        if let ChemicalPotential::NanoKelvin(mu) = self.chemical_potential {
            if !mu.is_finite() {
                return Err(Error::invalid("chemical_potential must be finite"));
            }
        }
        if self.b == self.b0 {
            return Err(Error::Domain(format!("scattering length has a pole at B = B0 = {} G", self.b0)));
        }
        Ok(())
    }

    pub fn units(&self) -> UnitSystem {
        UnitSystem {
            l0: self.l0.unwrap_or(self.r0_tilde) * NM,
            mass: self.mass_amu * ATOMIC_MASS_UNIT,
        }
    }

    pub fn a1(&self) -> Result<f64> {
        resonant_scattering_length(self.a1_bg, self.b, self.b0, self.delta_b)
    }
}

/// Converts to internal units, recording every factor.
///
/// `g₁ = 4πa₁`, `g₂ = 4πa₂/2`, `g₁₂ = 3πa₁₂` (reduced mass `2m/3`), `ν = Δμ(B - B₀)`.
/// A negative `a₁` converts, but the returned parameters then fail
/// [`ModelParams::require_mean_field_stable`].
pub fn to_internal(lab: &LabParams) -> Result<InternalModel> {
    lab.validate()?;
    let u = lab.units();
    let mut ledger = ConversionLedger {
        units: u,
        energy_unit_joule: u.energy(),
        energy_unit_nk: u.energy() / (BOLTZMANN * NANOKELVIN),
        g_convention: G_CONVENTION.into(),
        entries: Vec::new(),
    };
    let a0 = BOHR_RADIUS / u.l0;
    let a1 = lab.a1()?;
    let g1 = ledger.push("g1", a1, "a0 (a1 at B)", 4.0 * PI * a0, "4 pi a1 / l0");
    let g2 = ledger.push("g2", lab.a2, "a0", 2.0 * PI * a0, "4 pi a2 / (2 l0)");
    let g12 = ledger.push("g12", lab.a12, "a0", 3.0 * PI * a0, "2 pi a12 / (2/3) / l0");
    let g = ledger.push("g", lab.g_res, "um^-1/2", u.per_sqrt_inverse_um(), "sqrt(l0 / um)");
    let r0 = ledger.push("r0_tilde", lab.r0_tilde, "nm", u.per_nm(), "nm / l0");
    let half_length = ledger.push("half_length", lab.half_length, "um", UM / u.l0, "um / l0");
    let delta_mu = ledger.push("delta_mu", lab.delta_mu, "kHz/G", u.per_khz(), "h kHz / E0");
    let nu = ledger.push("nu", lab.b - lab.b0, "G (B - B0)", delta_mu, "delta_mu (B - B0)");
    let dens = u.per_inverse_cm3();
    let n10 = ledger.push("n10", lab.n10, "cm^-3", dens, "cm^-3 l0^3");
    let n20 = ledger.push("n20", lab.n20, "cm^-3", dens, "cm^-3 l0^3");
    let n0 = match lab.n0 {
        Some(n0) => ledger.push("n0", n0, "cm^-3", dens, "cm^-3 l0^3"),
        None => n10 + 2.0 * n20,
    };
    let mu = match lab.chemical_potential {
        ChemicalPotential::NanoKelvin(mu) => ledger.push("mu", mu, "nK", u.per_nanokelvin(), "kB nK / E0"),
        ChemicalPotential::Rule(MuRule::MeanField) => n10 * g1,
    };
    let params = ModelParams {
        m: 1.0,
        g1,
        g2,
        g12,
        g,
        r0_tilde: r0,
        half_length,
        mu,
        nu,
        field_map: FieldMap {
            b0: lab.b0,
            delta_b: lab.delta_b,
            delta_mu,
        },
        vertex: lab.vertex,
    };
    params.validate()?;
    let state = CondensateState::real(n10, n20)?;
    Ok(InternalModel {
        params,
        state,
        n0,
        ledger,
    })
}

/// Inverse of [`to_internal`] for a given unit system. The chemical potential
/// is always returned in nK.
pub fn to_lab(params: &ModelParams, state: &CondensateState, n0: Option<f64>, units: &UnitSystem, mass_amu: f64) -> Result<LabParams> {
    params.validate()?;
    let a0 = BOHR_RADIUS / units.l0;
    let fm = params.field_map;
    let b = fm.field_for_detuning(params.nu);
    let a1 = params.g1 / (4.0 * PI * a0);
    let factor = 1.0 - fm.delta_b / (b - fm.b0);
    if factor == 0.0 || b == fm.b0 {
        return Err(Error::Domain("atomic scattering length cannot be inverted at this field".into()));
    }
    let dens = units.per_inverse_cm3();
    Ok(LabParams {
        mass_amu,
        a1_bg: a1 / factor,
        a2: params.g2 / (2.0 * PI * a0),
        a12: params.g12 / (3.0 * PI * a0),
        b,
        b0: fm.b0,
        delta_b: fm.delta_b,
        delta_mu: fm.delta_mu / units.per_khz(),
        g_res: params.g / units.per_sqrt_inverse_um(),
        n10: state.n10 / dens,
        n20: state.n20 / dens,
        n0: n0.map(|n| n / dens),
        half_length: params.half_length * units.l0 / UM,
        r0_tilde: params.r0_tilde * units.l0 / NM,
        l0: Some(units.l0 / NM),
        chemical_potential: ChemicalPotential::NanoKelvin(params.mu / units.per_nanokelvin()),
        vertex: params.vertex,
    })
}

/// `ΔB` such that `Δμ ΔB = k_B T`, with `Δμ` in kHz/G and `T` in nK.
pub fn width_for_energy(delta_mu_khz_per_g: f64, t_nk: f64) -> f64 {
    BOLTZMANN * t_nk * NANOKELVIN / (PLANCK * KHZ * delta_mu_khz_per_g)
}

/// Cs-133 reference parameters near the narrow g-wave resonance:
/// `n₁₀ ∈ {1.5e13, 1.5e11} cm⁻³`, `B - B₀ ∈ {3ΔB, 4ΔB/3}`, Cs atoms,
/// `a₁,bg = 127 a₀`, `a₂ = 220 a₀`, `g = 8.5 μm^{-1/2}`, `|r̃₀| = 1 nm`, `L = 0.25 μm`,
/// `ΔB` fixed by `Δμ ΔB = k_B × 410 nK` with `Δμ = h × 770 kHz/G`.
pub fn reference_lab_params(n10_cm3: f64, field_offset_in_widths: f64, n20_cm3: f64) -> LabParams {
    let delta_mu = 770.0;
    let delta_b = width_for_energy(delta_mu, 410.0);
    let b0 = 19.87;
    LabParams {
        mass_amu: CESIUM_133_AMU,
        a1_bg: 127.0,
        a2: 220.0,
        a12: 0.0,
        b: b0 + field_offset_in_widths * delta_b,
        b0,
        delta_b,
        delta_mu,
        g_res: 8.5,
        n10: n10_cm3,
        n20: n20_cm3,
        n0: None,
        half_length: 0.25,
        r0_tilde: 1.0,
        l0: None,
        chemical_potential: ChemicalPotential::Rule(MuRule::MeanField),
        vertex: VertexShape::G_WAVE,
    }
}
