//! Mean-field energy density and its global minimizer.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{CondensateState, ModelParams, Phase};

/// `Σ_σ(-μ_σ n_σ0 + g_σ n_σ0²/2) + g₁₂ n₁₀ n₂₀`. The resonance term does not
/// contribute because the vertex vanishes at zero momentum.
pub fn mean_field_energy(params: &ModelParams, state: &CondensateState) -> f64 {
    let (n1, n2) = (state.n10, state.n20);
    -params.mu1() * n1 + 0.5 * params.g1 * n1 * n1 - params.mu2() * n2
        + 0.5 * params.g2 * n2 * n2
        + params.g12 * n1 * n2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSolution {
    pub state: CondensateState,
    pub phase: Phase,
    pub energy: f64,
}

/// Global minimum of the mean-field energy over `n₁₀, n₂₀ ≥ 0`.
///
/// The quartic is convex when `g₁g₂ > g₁₂²`, so the minimum is one of the
/// vacuum, the two single-species minimizers, or the interior stationary point.
pub fn minimize_mean_field(params: &ModelParams) -> Result<MeanFieldSolution> {
    params.require_mean_field_stable()?;
    let (mu1, mu2) = (params.mu1(), params.mu2());
    let mut candidates = vec![(0.0, 0.0)];
    if mu1 > 0.0 {
        candidates.push((mu1 / params.g1, 0.0));
    }
    if mu2 > 0.0 {
        candidates.push((0.0, mu2 / params.g2));
    }
    let det = params.g1 * params.g2 - params.g12 * params.g12;
    let n1 = (params.g2 * mu1 - params.g12 * mu2) / det;
    let n2 = (params.g1 * mu2 - params.g12 * mu1) / det;
    if n1 > 0.0 && n2 > 0.0 {
        candidates.push((n1, n2));
    }

    let mut best: Option<MeanFieldSolution> = None;
    for (n1, n2) in candidates {
        let state = CondensateState::real(n1, n2)?;
        let energy = mean_field_energy(params, &state);
        if best.map_or(true, |b| energy < b.energy) {
            best = Some(MeanFieldSolution {
                state,
                phase: Phase::classify(n1, n2, 0.0),
                energy,
            });
        }
    }
    Ok(best.expect("vacuum candidate always present"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn vacuum_energy_is_zero() {
        let p = fixtures::params();
        let s = CondensateState::real(0.0, 0.0).unwrap();
        assert_eq!(mean_field_energy(&p, &s), 0.0);
    }

    #[test]
    fn single_component_minimum() {
        let p = fixtures::params();
        let s = CondensateState::real(p.mu1() / p.g1, 0.0).unwrap();
        assert_relative_eq!(
            mean_field_energy(&p, &s),
            -p.mu1() * p.mu1() / (2.0 * p.g1),
            max_relative = 1e-15
        );
    }

    #[test]
    fn energy_ignores_phases() {
        let p = fixtures::params();
        let a = CondensateState::new(0.3, 0.0, 0.2, 0.0).unwrap();
        let b = CondensateState::new(0.3, 1.7, 0.2, 4.1).unwrap();
        assert_eq!(mean_field_energy(&p, &a), mean_field_energy(&p, &b));
    }

    #[test]
    fn normal_phase_for_negative_potentials() {
        let p = fixtures::params().with_mu_nu(-0.2, 0.5);
        let sol = minimize_mean_field(&p).unwrap();
        assert_eq!(sol.phase, Phase::Normal);
        assert_eq!((sol.state.n10, sol.state.n20), (0.0, 0.0));
    }

    #[test]
    fn decoupled_atomic_superfluid() {
        let p = ModelParams {
            g12: 0.0,
            ..fixtures::params().with_mu_nu(0.3, 1.0)
        };
        let sol = minimize_mean_field(&p).unwrap();
        assert_eq!(sol.phase, Phase::Asf);
        assert_relative_eq!(sol.state.n10, 0.3 / p.g1, max_relative = 1e-15);
    }

    #[test]
    fn rejects_unbounded_quartic() {
        let p = ModelParams {
            g12: 2.0,
            ..fixtures::params()
        };
        assert!(minimize_mean_field(&p).is_err());
    }

    fn grid_minimum(p: &ModelParams, n_max: f64, pts: usize) -> (f64, f64, f64) {
        let mut best = (0.0, 0.0, 0.0);
        for i in 0..pts {
            for j in 0..pts {
                let n1 = n_max * i as f64 / (pts - 1) as f64;
                let n2 = n_max * j as f64 / (pts - 1) as f64;
                let e = mean_field_energy(p, &CondensateState::real(n1, n2).unwrap());
                if e < best.2 {
                    best = (n1, n2, e);
                }
            }
        }
        best
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn matches_grid_search(mu1 in -1.0f64..1.0, mu2 in -1.0f64..1.0, g12 in -0.8f64..0.8) {
            let base = fixtures::params();
            let p = ModelParams { g1: 1.0, g2: 1.0, g12, ..base }.with_mu_nu(mu1, 2.0 * mu1 - mu2);
            let sol = minimize_mean_field(&p).unwrap();
            let n_max = 6.0;
            let pts = 200;
            let h = n_max / (pts - 1) as f64;
            let (gn1, gn2, ge) = grid_minimum(&p, n_max, pts);
            // closed form is never worse than the grid and sits within a grid cell of it
            prop_assert!(sol.energy <= ge + 1e-12);
            let tol = 2.0 * h / (1.0 - g12.abs()).max(0.2);
            prop_assert!((sol.state.n10 - gn1).abs() <= tol, "{} vs {}", sol.state.n10, gn1);
            prop_assert!((sol.state.n20 - gn2).abs() <= tol, "{} vs {}", sol.state.n20, gn2);
        }
    }
}
