//! Quick invariant checks runnable from the command line.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::{bdg_oracle, excitation_spectrum, BogoliubovBlock, OracleOutcome};
use crate::error::Result;
use crate::io::write_sweep_csv;
use crate::lhy::{coth_tail, lhy_energy_value, tail_identity_check, QuadratureConfig};
use crate::model::{CondensateState, FieldMap, ModelParams, VertexShape};
use crate::phase::{
    check_phase_sequence, condensate_ratio, critical_detunings, solve_stationarity, sweep, AlphaMode, ControlPoint,
};
use crate::units::{reference_lab_params, to_internal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn row(name: &str, outcome: Result<(bool, String)>) -> CheckRow {
    match outcome {
        Ok((passed, detail)) => CheckRow {
            name: name.into(),
            passed,
            detail,
        },
        Err(e) => CheckRow {
            name: name.into(),
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn small_params() -> ModelParams {
    ModelParams {
        m: 1.0,
        g1: 0.05,
        g2: 0.08,
        g12: 0.0,
        g: 0.3,
        r0_tilde: 1.0,
        half_length: 2.0,
        mu: 0.0,
        nu: 0.0,
        field_map: FieldMap {
            b0: 0.0,
            delta_b: 1.0,
            delta_mu: 1.0,
        },
        vertex: VertexShape::G_WAVE,
    }
}

fn spectrum_oracle(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut compared = 0;
    for _ in 0..200 {
        let e1 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let e2 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let l1 = Complex64::from_polar(rng.gen_range(0.0..0.5) * e1, rng.gen_range(0.0..6.3));
        let l2 = Complex64::from_polar(rng.gen_range(0.0..0.5) * e2, rng.gen_range(0.0..6.3));
        let t = Complex64::from_polar(rng.gen_range(0.0..0.3) * e1.min(e2), rng.gen_range(0.0..6.3));
        let b = BogoliubovBlock::new(e1, e2, l1, l2, t);
        let sp = excitation_spectrum(&b);
        if let (true, OracleOutcome::Stable([lo, hi])) = (sp.stable, bdg_oracle(&b)) {
            worst = worst
                .max(((sp.e_minus - lo) / lo).abs())
                .max(((sp.e_plus - hi) / hi).abs());
            compared += 1;
        }
    }
    Ok((compared > 150 && worst < 1e-9, format!("{compared} blocks, worst rel {worst:.2e}")))
}

fn tail_identity() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for l in [1.0, 7.0, 50.0] {
        for k in [0.1, 2.0, 20.0] {
            let direct = tail_identity_check(l, k)?;
            worst = worst.max(((direct - coth_tail(l, k)) / direct).abs());
        }
    }
    Ok((worst < 1e-8, format!("worst rel {worst:.2e}")))
}

fn stationarity_endpoints() -> Result<(bool, String)> {
    let p = small_params();
    let (n0, alpha) = (1.0, -0.02);
    let (nu_c, nu_c1) = critical_detunings(&p, n0, alpha)?;
    let at_c = solve_stationarity(&p.with_mu_nu(0.0, nu_c), n0, alpha)?.state.n20;
    let at_c1 = solve_stationarity(&p.with_mu_nu(0.0, nu_c1), n0, alpha)?.state.n20;
    let r = condensate_ratio(&p, n0, alpha, nu_c1)?;
    let mid = 0.5 * (nu_c + nu_c1);
    let st = solve_stationarity(&p.with_mu_nu(0.0, mid), n0, alpha)?;
    let rm = condensate_ratio(&p, n0, alpha, mid)?;
    let dev = (rm - st.state.n10 / st.state.n20).abs() / rm;
    let ok = at_c == 0.0 && (at_c1 - 0.5 * n0).abs() <= 1e-12 * n0 && r == 0.0 && dev < 1e-12;
    Ok((ok, format!("n20(nu_c)={at_c:e}, n20(nu_c1)={at_c1}, ratio dev {dev:.1e}")))
}

fn phase_sequence_and_determinism() -> Result<(bool, String)> {
    let p = small_params();
    let (n0, alpha) = (1.0, -0.02);
    let (nu_c, nu_c1) = critical_detunings(&p, n0, alpha)?;
    let d = 0.1 * (nu_c - nu_c1);
    let grid: Vec<ControlPoint> = (0..60)
        .map(|i| ControlPoint::detuning(nu_c + d - (nu_c - nu_c1 + 2.0 * d) * i as f64 / 59.0, n0))
        .collect();
    let cfg = QuadratureConfig::for_params(&p);
    let run = || sweep(&p, &grid, &cfg, AlphaMode::Fixed { alpha });
    let units = reference_lab_params(1e12, 3.0, 0.0).units();
    let (a, b) = (run(), run());
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    write_sweep_csv(&mut ca, &a, &units)?;
    write_sweep_csv(&mut cb, &b, &units)?;
    let seq = check_phase_sequence(&a);
    Ok((seq.is_ok() && ca == cb, format!("sequence {:?}, identical csv {}", seq.err(), ca == cb)))
}

fn phase_independence() -> Result<(bool, String)> {
    let p = small_params();
    let (n10, n20) = (0.02, 0.01);
    let p = p.with_mu_nu(p.g1 * n10, 2.0 * p.g1 * n10 - p.g2 * n20 + 0.3);
    let cfg = QuadratureConfig {
        radial_points: 6,
        ..QuadratureConfig::for_params(&p)
    };
    let base = lhy_energy_value(&p, &CondensateState::new(n10, 0.0, n20, 0.0)?, &cfg)?.energy_density;
    let mut worst = 0.0f64;
    for (t1, t2) in [(0.7, 0.0), (0.0, 2.1), (1.3, 4.0)] {
        let e = lhy_energy_value(&p, &CondensateState::new(n10, t1, n20, t2)?, &cfg)?.energy_density;
        worst = worst.max(((e - base) / base).abs());
    }
    Ok((worst < 1e-8, format!("worst rel {worst:.1e}")))
}

fn ledger_replay() -> Result<(bool, String)> {
    let im = to_internal(&reference_lab_params(1.5e13, 3.0, 1e9))?;
    Ok((im.ledger.replay(), format!("{} entries", im.ledger.entries.len())))
}

fn vacuum() -> Result<(bool, String)> {
    let p = small_params().with_mu_nu(-0.1, 0.2);
    let e = lhy_energy_value(&p, &CondensateState::real(0.0, 0.0)?, &QuadratureConfig::for_params(&p))?;
    Ok((e.energy_density == 0.0, format!("e = {:e}", e.energy_density)))
}

/// Runs all checks; `seed` drives the randomized ones.
pub fn run(seed: u64) -> Vec<CheckRow> {
    vec![
        row("spectrum_oracle", spectrum_oracle(seed)),
        row("tail_identity", tail_identity()),
        row("stationarity_endpoints", stationarity_endpoints()),
        row("phase_sequence_determinism", phase_sequence_and_determinism()),
        row("phase_independence", phase_independence()),
        row("ledger_replay", ledger_replay()),
        row("vacuum_lhy", vacuum()),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for r in super::run(3) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
