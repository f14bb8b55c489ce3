//! Model parameters, condensate order parameters and quasi-2D momenta.
//!
//! Everything here is in internal natural units: `ħ = 1`, lengths in units
//! of the reference length `l₀`, energies in `ħ²/(m_ref l₀²)`. The atom
//! mass `m` is kept explicit (1 for the standard conversion).

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{wrap_angle, Direction, MAX_ORDER};

/// Magnetic-field calibration of the detuning and scattering length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    /// Resonance position, gauss.
    pub b0: f64,
    /// Resonance width, gauss.
    pub delta_b: f64,
    /// Relative magnetic moment, internal energy per gauss.
    pub delta_mu: f64,
}

impl FieldMap {
    /// Detuning `ν = Δμ (B - B₀)`.
    pub fn detuning(&self, b: f64) -> f64 {
        self.delta_mu * (b - self.b0)
    }

    /// Inverse of [`FieldMap::detuning`].
    pub fn field_for_detuning(&self, nu: f64) -> f64 {
        self.b0 + nu / self.delta_mu
    }
}

/// Angular structure of the atom-pair/molecule coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VertexShape {
    /// `g j_l(|r̃₀| p) Y*_lm(p̂)`; `l` must be even for identical bosons.
    PartialWave { l: u32, m: i32 },
    /// Momentum-independent s-wave coupling `g`. Used to contrast phase locking;
    /// its LHY integral has no ultraviolet counterterm.
    Constant,
}

impl VertexShape {
    pub const G_WAVE: VertexShape = VertexShape::PartialWave { l: 4, m: 2 };

    /// Whether the vertex is unchanged under `p → -p` together with `θ → π - θ`
    /// so that `±n` z-modes give identical spectra.
    pub(crate) fn reflection_even(&self) -> bool {
        match *self {
            VertexShape::PartialWave { l, m } => (l as i64 + m as i64) % 2 == 0,
            VertexShape::Constant => true,
        }
    }
}

impl Default for VertexShape {
    fn default() -> Self {
        VertexShape::G_WAVE
    }
}

/// Couplings, geometry, chemical potential and detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Atom mass (1 in the standard conversion).
    pub m: f64,
    pub g1: f64,
    pub g2: f64,
    pub g12: f64,
    /// Resonance coupling.
    pub g: f64,
    /// Molecular size `|r̃₀|`.
    pub r0_tilde: f64,
    /// Half-height `L` of the periodic z-box.
    pub half_length: f64,
    /// Atomic chemical potential `μ = μ₁`.
    pub mu: f64,
    /// Detuning `ν`.
    pub nu: f64,
    pub field_map: FieldMap,
    #[serde(default)]
    pub vertex: VertexShape,
}

impl ModelParams {
    /// Checks the structural invariants (`m, L, |r̃₀| > 0`, `g ≥ 0`, finite values).
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.m,
            self.g1,
            self.g2,
            self.g12,
            self.g,
            self.r0_tilde,
            self.half_length,
            self.mu,
            self.nu,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("non-finite model parameter"));
        }
        if self.m <= 0.0 {
            return Err(Error::invalid(format!("mass must be positive, got {}", self.m)));
        }
        if self.half_length <= 0.0 {
            return Err(Error::invalid(format!(
                "box half-length must be positive, got {}",
                self.half_length
            )));
        }
        if self.r0_tilde <= 0.0 {
            return Err(Error::invalid(format!(
                "molecular size must be positive, got {}",
                self.r0_tilde
            )));
        }
        if self.g < 0.0 {
            return Err(Error::invalid(format!(
                "resonance coupling must be nonnegative, got {}",
                self.g
            )));
        }
        if let VertexShape::PartialWave { l, m } = self.vertex {
            if l > MAX_ORDER || m.unsigned_abs() > l || l % 2 == 1 {
                return Err(Error::invalid(format!(
                    "vertex partial wave (l={l}, m={m}) must have even l <= {MAX_ORDER} and |m| <= l"
                )));
            }
        }
        Ok(())
    }

    /// `g₁ > 0`, `g₂ > 0`, `g₁g₂ > g₁₂²`: the mean-field quartic is bounded below.
    pub fn is_mean_field_stable(&self) -> bool {
        self.g1 > 0.0 && self.g2 > 0.0 && self.g1 * self.g2 > self.g12 * self.g12
    }

    pub fn require_mean_field_stable(&self) -> Result<()> {
        if self.is_mean_field_stable() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "mean-field stability requires g1 > 0, g2 > 0, g1*g2 > g12^2 (g1={}, g2={}, g12={})",
                self.g1, self.g2, self.g12
            )))
        }
    }

    pub fn mu1(&self) -> f64 {
        self.mu
    }

    /// Molecular chemical potential `μ₂ = 2μ - ν`.
    pub fn mu2(&self) -> f64 {
        2.0 * self.mu - self.nu
    }

    /// Dimensionless box height `l = 2L/l₀` (lengths are already in units of `l₀`).
    pub fn box_parameter(&self) -> f64 {
        2.0 * self.half_length
    }

    /// Free kinetic energy `|k|²/(2σm)` of species `sigma` (1 atom, 2 molecule).
    pub fn kinetic(&self, k2: f64, sigma: u8) -> f64 {
        k2 / (2.0 * f64::from(sigma) * self.m)
    }

    pub fn with_mu_nu(&self, mu: f64, nu: f64) -> Self {
        Self {
            mu,
            nu,
            ..self.clone()
        }
    }

    pub fn with_g(&self, g: f64) -> Self {
        Self { g, ..self.clone() }
    }
}

/// Condensate order parameters `Ψ_σ0 = √n_σ0 e^{iθ_σ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensateState {
    pub n10: f64,
    pub theta1: f64,
    pub n20: f64,
    pub theta2: f64,
}

impl CondensateState {
    pub fn new(n10: f64, theta1: f64, n20: f64, theta2: f64) -> Result<Self> {
        if !(n10 >= 0.0) || !(n20 >= 0.0) || !n10.is_finite() || !n20.is_finite() {
            return Err(Error::invalid(format!(
                "condensate densities must be finite and nonnegative, got ({n10}, {n20})"
            )));
        }
        if !theta1.is_finite() || !theta2.is_finite() {
            return Err(Error::invalid("condensate phases must be finite"));
        }
        Ok(Self {
            n10,
            theta1: wrap_angle(theta1),
            n20,
            theta2: wrap_angle(theta2),
        })
    }

    /// Real order parameters (both phases zero).
    pub fn real(n10: f64, n20: f64) -> Result<Self> {
        Self::new(n10, 0.0, n20, 0.0)
    }

    pub fn psi1(&self) -> Complex64 {
        Complex64::from_polar(self.n10.sqrt(), self.theta1)
    }

    pub fn psi2(&self) -> Complex64 {
        Complex64::from_polar(self.n20.sqrt(), self.theta2)
    }

    /// Total condensed atom number density `n₁₀ + 2n₂₀`.
    pub fn total_density(&self) -> f64 {
        self.n10 + 2.0 * self.n20
    }

    pub fn with_densities(&self, n10: f64, n20: f64) -> Result<Self> {
        Self::new(n10, self.theta1, n20, self.theta2)
    }

    pub fn with_phases(&self, theta1: f64, theta2: f64) -> Result<Self> {
        Self::new(self.n10, theta1, self.n20, theta2)
    }
}

/// A quasi-2D mode: z-index `n` (`k_z = nπ/L`), in-plane magnitude and azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiMomentum {
    pub n: i64,
    pub k_par: f64,
    pub phi: f64,
}

impl QuasiMomentum {
    pub fn new(n: i64, k_par: f64, phi: f64) -> Result<Self> {
        if !(k_par >= 0.0) || !k_par.is_finite() || !phi.is_finite() {
            return Err(Error::invalid(format!(
                "in-plane momentum must be finite and nonnegative, got ({k_par}, {phi})"
            )));
        }
        Ok(Self {
            n,
            k_par,
            phi: wrap_angle(phi),
        })
    }

    pub fn k_z(&self, half_length: f64) -> f64 {
        self.n as f64 * PI / half_length
    }

    pub fn magnitude_squared(&self, half_length: f64) -> f64 {
        let kz = self.k_z(half_length);
        kz * kz + self.k_par * self.k_par
    }

    pub fn magnitude(&self, half_length: f64) -> f64 {
        self.magnitude_squared(half_length).sqrt()
    }

    /// Direction of the 3D momentum; `θ = atan2(k_par, k_z)`.
    pub fn direction(&self, half_length: f64) -> Direction {
        Direction::from_components(self.k_z(half_length), self.k_par, self.phi)
    }

    pub fn is_zero(&self) -> bool {
        self.n == 0 && self.k_par == 0.0
    }
}

/// Which condensates are present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "N")]
    Normal,
    #[serde(rename = "ASF")]
    Asf,
    #[serde(rename = "MSF")]
    Msf,
    #[serde(rename = "AMSF")]
    Amsf,
}

impl Phase {
    pub fn classify(n10: f64, n20: f64, tol: f64) -> Phase {
        match (n10 > tol, n20 > tol) {
            (false, false) => Phase::Normal,
            (true, false) => Phase::Asf,
            (false, true) => Phase::Msf,
            (true, true) => Phase::Amsf,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Normal => "N",
            Phase::Asf => "ASF",
            Phase::Msf => "MSF",
            Phase::Amsf => "AMSF",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
