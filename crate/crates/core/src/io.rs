//! Run configuration and result formats.
//!
//! Configs are JSON documents carrying `schema_version`; unknown keys are
//! rejected and every schema error names the offending path. Results are
//! CSV with fixed headers or JSON, with every float written as `{:.16e}`
//! (17 significant digits).

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::lhy::QuadratureConfig;
use crate::model::ModelParams;
use crate::phase::PhasePoint;
use crate::units::{LabParams, UnitSystem};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub lab: LabParams,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSettings>,
    /// Recorded in the manifest; seeds randomized self-test draws.
    #[serde(default)]
    pub seed: u64,
}

/// Optional overrides of the default quadrature; all values in internal units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_cut: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub azimuthal_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

impl QuadratureSettings {
    /// Fills unset fields from [`QuadratureConfig::for_params`]. An explicit
    /// `lambda_cut` without `n_max` gets the matching default `n_max`.
    pub fn resolve(&self, params: &ModelParams) -> Result<QuadratureConfig> {
        let base = QuadratureConfig::for_params(params);
        let lambda_cut = self.lambda_cut.unwrap_or(base.lambda_cut);
        let cfg = QuadratureConfig {
            lambda_cut,
            n_max: self
                .n_max
                .unwrap_or_else(|| crate::lhy::default_n_max(params, lambda_cut)),
            radial_points: self.radial_points.unwrap_or(base.radial_points),
            azimuthal_points: self.azimuthal_points.unwrap_or(base.azimuthal_points),
            fd_step: self.fd_step.unwrap_or(base.fd_step),
        };
        cfg.validate(params)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaSettings {
    /// Constant `α` in nK (nonpositive).
    Fixed { alpha_nk: f64 },
    /// `α` from the LHY integral; sweeps iterate it to self-consistency.
    Recomputed {
        initial_nk: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rel_tol: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_iter: Option<usize>,
    },
}

/// Sweep control in lab units: exactly one of `nu_nk`, `b` (gauss), plus `n0` (cm⁻³).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabControl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_nk: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub n0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    NuNk,
    B,
}

/// `count` equispaced values of `variable` from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub n0: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    #[serde(default)]
    pub points: Vec<LabControl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<SweepRange>,
}

impl SweepSettings {
    /// Explicit points followed by the range points.
    pub fn controls(&self) -> Vec<LabControl> {
        let mut out = self.points.clone();
        if let Some(r) = self.range {
            for i in 0..r.count {
                let x = if r.count == 1 {
                    r.start
                } else {
                    r.start + (r.stop - r.start) * i as f64 / (r.count - 1) as f64
                };
                out.push(match r.variable {
                    SweepVariable::NuNk => LabControl {
                        nu_nk: Some(x),
                        b: None,
                        n0: r.n0,
                    },
                    SweepVariable::B => LabControl {
                        nu_nk: None,
                        b: Some(x),
                        n0: r.n0,
                    },
                });
            }
        }
        out
    }
}

/// Inclusive equispaced grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl LinearGrid {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            c => (0..c)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (c - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSettings {
    pub n_values: Vec<i64>,
    /// In-plane momentum, nm⁻¹.
    pub k_par: LinearGrid,
    /// Equispaced azimuths on `[0, 2π)`.
    pub phi_points: usize,
}

fn schema_error(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

impl Config {
    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: Config = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            schema_error(path, e.into_inner().to_string())
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(schema_error(
                "schema_version",
                format!("unsupported schema version {} (expected {SCHEMA_VERSION})", cfg.schema_version),
            ));
        }
        Ok(cfg)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_value(parse_json(s)?)
    }

    /// Reads `path`, applies `key=value` overrides and parses. Returns the
    /// config together with the resolved JSON document.
    pub fn load(path: &Path, overrides: &[String]) -> Result<(Self, Value)> {
        let text = std::fs::read_to_string(path)?;
        let mut value = parse_json(&text)?;
        apply_overrides(&mut value, overrides)?;
        let cfg = Self::from_value(value.clone())?;
        Ok((cfg, value))
    }

    pub fn to_json_string(&self) -> Result<String> {
        to_json_string(self)
    }
}

fn parse_json(s: &str) -> Result<Value> {
    serde_json::from_str(s).map_err(|e| schema_error(".", format!("malformed JSON: {e}")))
}

/// Applies `a.b.c=value` overrides. The value is parsed as JSON when possible
/// and taken as a string otherwise; numeric segments index arrays.
pub fn apply_overrides(root: &mut Value, overrides: &[String]) -> Result<()> {
    for ov in overrides {
        let (path, raw) = ov
            .split_once('=')
            .ok_or_else(|| schema_error(ov.clone(), "override must have the form key=value"))?;
        if path.is_empty() {
            return Err(schema_error(ov.clone(), "empty override path"));
        }
        let new: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut node = &mut *root;
        let segments: Vec<&str> = path.split('.').collect();
        for (i, seg) in segments.iter().enumerate() {
            let last = i + 1 == segments.len();
            node = match node {
                Value::Object(map) => {
                    if last {
                        map.insert(seg.to_string(), new.clone());
                        break;
                    }
                    map.entry(seg.to_string())
                        .or_insert_with(|| Value::Object(Default::default()))
                }
                Value::Array(items) => {
                    let idx: usize = seg
                        .parse()
                        .map_err(|_| schema_error(path, format!("`{seg}` is not an array index")))?;
                    let len = items.len();
                    let slot = items
                        .get_mut(idx)
                        .ok_or_else(|| schema_error(path, format!("index {idx} out of range ({len})")))?;
                    if last {
                        *slot = new.clone();
                        break;
                    }
                    slot
                }
                _ => return Err(schema_error(path, format!("`{seg}` is not inside an object or array"))),
            };
        }
    }
    Ok(())
}

/// JSON formatter writing floats with 17 significant digits.
struct SigFormatter;

impl serde_json::ser::Formatter for SigFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{:.16e}", f64::from(value))
    }
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(writer: W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(writer, SigFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Io(std::io::Error::other(e)))
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    write_json(&mut buf, value)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Float field with 17 significant digits.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub const SWEEP_HEADER: [&str; 14] = [
    "schema_version",
    "index",
    "nu_nk",
    "b_gauss",
    "n0_cm3",
    "n10_cm3",
    "n20_cm3",
    "label",
    "alpha_nk",
    "residual_n10_nk",
    "residual_n20_nk",
    "mu_nk",
    "mu2_nk",
    "stable",
];

/// Sweep results in lab units, one row per point in input order.
pub fn write_sweep_csv<W: Write>(writer: W, points: &[PhasePoint], units: &UnitSystem) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SWEEP_HEADER)?;
    let e = |x: f64| sig17(units.energy_to_nk(x));
    let n = |x: f64| sig17(units.density_to_cm3(x));
    for p in points {
        w.write_record([
            SCHEMA_VERSION.to_string(),
            p.index.to_string(),
            e(p.nu),
            p.b.map(sig17).unwrap_or_default(),
            n(p.n0),
            n(p.state.n10),
            n(p.state.n20),
            p.label.to_string(),
            e(p.alpha_used),
            e(p.diagnostics.residual_n10),
            e(p.diagnostics.residual_n20),
            e(p.diagnostics.mu),
            e(p.diagnostics.mu2),
            p.diagnostics.stable.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One mode of the excitation spectrum in lab units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub n: i64,
    /// nm⁻¹.
    pub k_par: f64,
    pub phi: f64,
    /// nK; NaN when unstable.
    pub e_plus: f64,
    pub e_minus: f64,
    pub stable: bool,
}

pub const SPECTRUM_HEADER: [&str; 7] = ["schema_version", "n", "k_par_inv_nm", "phi", "e_plus_nk", "e_minus_nk", "stable"];

pub fn write_spectrum_csv<W: Write>(writer: W, rows: &[SpectrumRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SPECTRUM_HEADER)?;
    for r in rows {
        w.write_record([
            SCHEMA_VERSION.to_string(),
            r.n.to_string(),
            sig17(r.k_par),
            sig17(r.phi),
            sig17(r.e_plus),
            sig17(r.e_minus),
            r.stable.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{reference_lab_params, ChemicalPotential};
    use proptest::prelude::*;

    fn sample() -> Config {
        Config {
            schema_version: SCHEMA_VERSION,
            lab: reference_lab_params(1.5e13, 3.0, 1e9),
            quadrature: QuadratureSettings::default(),
            alpha: Some(AlphaSettings::Fixed { alpha_nk: -410.0 }),
            sweep: None,
            spectrum: None,
            seed: 7,
        }
    }

    #[test]
    fn round_trip_sample() {
        let c = sample();
        let s = c.to_json_string().unwrap();
        assert_eq!(Config::from_json_str(&s).unwrap(), c);
        assert!(s.contains("-4.1000000000000000e2"));
    }

    #[test]
    fn unknown_key_names_path() {
        let mut v = serde_json::to_value(sample()).unwrap();
        v["lab"]["a1_bgg"] = 1.0.into();
        match Config::from_value(v) {
            Err(Error::Schema { path, message }) => {
                assert_eq!(path, "lab.a1_bgg");
                assert!(message.contains("a1_bgg"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_type_names_path() {
        let mut v = serde_json::to_value(sample()).unwrap();
        v["lab"]["n10"] = "dense".into();
        match Config::from_value(v) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "lab.n10"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_physics_field_is_an_error() {
        let mut v = serde_json::to_value(sample()).unwrap();
        v["lab"].as_object_mut().unwrap().remove("a2");
        assert!(matches!(Config::from_value(v), Err(Error::Schema { .. })));
    }

    #[test]
    fn schema_version_checked() {
        let mut v = serde_json::to_value(sample()).unwrap();
        v["schema_version"] = 2.into();
        match Config::from_value(v) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "schema_version"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overrides_apply_by_path() {
        let mut v = serde_json::to_value(sample()).unwrap();
        apply_overrides(
            &mut v,
            &[
                "lab.n10=2e12".into(),
                "quadrature.n_max=4000".into(),
                "lab.chemical_potential=mean_field".into(),
            ],
        )
        .unwrap();
        let c = Config::from_value(v.clone()).unwrap();
        assert_eq!(c.lab.n10, 2e12);
        assert_eq!(c.quadrature.n_max, Some(4000));
        assert!(apply_overrides(&mut v, &["novalue".into()]).is_err());
        assert!(apply_overrides(&mut v, &["lab.n10.x=1".into()]).is_err());
    }

    #[test]
    fn range_controls() {
        let s = SweepSettings {
            points: vec![],
            range: Some(SweepRange {
                variable: SweepVariable::B,
                start: 1.0,
                stop: 2.0,
                count: 3,
                n0: 1e12,
            }),
        };
        let c = s.controls();
        assert_eq!(c.len(), 3);
        assert_eq!(c[1].b, Some(1.5));
    }

    #[test]
    fn empty_sweep_csv_is_header_only() {
        let mut buf = Vec::new();
        let units = reference_lab_params(1e12, 3.0, 0.0).units();
        write_sweep_csv(&mut buf, &[], &units).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, format!("{}\n", SWEEP_HEADER.join(",")));
    }

    prop_compose! {
        fn arb_config()(
            n10 in 1e9f64..1e15, n20 in 0.0f64..1e14, off in 1.5f64..9.0, mu in -1e3f64..1e3,
            use_mu in any::<bool>(), lam in proptest::option::of(10.0f64..100.0),
            nmax in proptest::option::of(1usize..100_000), alpha in -1e3f64..0.0, seed in any::<u64>(),
            pts in proptest::collection::vec((proptest::option::of(-1e3f64..1e3), 1e10f64..1e14), 0..4),
        ) -> Config {
            let mut lab = reference_lab_params(n10, off, n20);
            if use_mu {
                lab.chemical_potential = ChemicalPotential::NanoKelvin(mu);
            }
            Config {
                schema_version: SCHEMA_VERSION,
                lab,
                quadrature: QuadratureSettings { lambda_cut: lam, n_max: nmax, ..Default::default() },
                alpha: Some(AlphaSettings::Fixed { alpha_nk: alpha }),
                sweep: Some(SweepSettings {
                    points: pts
                        .into_iter()
                        .map(|(nu, n0)| LabControl { nu_nk: nu, b: nu.is_none().then_some(20.0), n0 })
                        .collect(),
                    range: None,
                }),
                spectrum: None,
                seed,
            }
        }
    }

    proptest! {
        #[test]
        fn emit_parse_round_trip(c in arb_config()) {
            let s = c.to_json_string().unwrap();
            prop_assert_eq!(Config::from_json_str(&s).unwrap(), c);
        }
    }
}
