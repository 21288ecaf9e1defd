use serde::{Deserialize, Serialize};

use super::{optimize_with_samples, symmetric_optimal_detunings, Branch, OptimizationBounds};
use crate::error::{Error, Result};
use crate::model::{
    average_over, effective_detunings, CavityParams, DriveSettings, GateResponse, LambdaSystem,
    SamplerSpec,
};

/// How each coupling point is optimized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// When false only the zero-detuning statistics are computed.
    pub optimize: bool,
    /// Keep `B = 0` in numerical optimization.
    pub pin_field: bool,
    /// Branch of the analytic solution for symmetric systems.
    pub branch: Branch,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            optimize: true,
            pin_field: false,
            branch: Branch::Plus,
        }
    }
}

/// One coupling point. Rates in rad/s, field in gauss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kappa_ex: f64,
    pub delta_c_opt: f64,
    pub delta_a_opt: f64,
    pub b_opt: f64,
    pub fidelity_opt: f64,
    pub efficiency_opt: f64,
    pub fidelity_0: f64,
    pub efficiency_0: f64,
    /// Whether the optimum came from the closed-form symmetric solution.
    pub analytic: bool,
}

/// `g_↑ = g_↓*` within a relative `1e-12`: the condition for unit fidelity.
fn is_symmetric(system: &LambdaSystem) -> bool {
    let d = (system.g_up - system.g_down.conj()).norm();
    d <= 1e-12 * system.g_down.norm().max(system.g_up.norm())
}

/// Optimized and unoptimized averages as a function of the extrinsic coupling.
///
/// Symmetric systems use the analytic detunings where they exist and fall
/// back to zero detuning outside `[κ_i, κ_ex^opt]`; other systems are
/// optimized numerically. All points share one sample set.
pub fn sweep_coupling(
    system: &LambdaSystem,
    kappa_i: f64,
    kappa_ex: &[f64],
    options: &SweepOptions,
    sampler: &SamplerSpec,
) -> Result<Vec<SweepRow>> {
    if kappa_ex.is_empty() {
        return Err(Error::invalid("kappa_ex", "sweep range is empty"));
    }
    system.validate()?;
    let samples = sampler.draw()?;
    let symmetric = is_symmetric(system);
    kappa_ex
        .iter()
        .map(|&kex| {
            let cavity = CavityParams::new(kex, kappa_i)?;
            let zero = DriveSettings::resonant();
            let response = GateResponse::new(system, &cavity, &effective_detunings(&zero, system))?;
            let base = average_over(&response, &samples)?;
            let mut row = SweepRow {
                kappa_ex: kex,
                delta_c_opt: 0.0,
                delta_a_opt: 0.0,
                b_opt: 0.0,
                fidelity_opt: base.mean_fidelity,
                efficiency_opt: base.mean_efficiency,
                fidelity_0: base.mean_fidelity,
                efficiency_0: base.mean_efficiency,
                analytic: false,
            };
            if !options.optimize {
                return Ok(row);
            }
            if symmetric {
                row.analytic = true;
                if let Ok(opt) = symmetric_optimal_detunings(&cavity, system) {
                    let (dc, da) = opt.branch(options.branch);
                    let drive = DriveSettings::detuned(dc, da, 0.0);
                    let response =
                        GateResponse::new(system, &cavity, &effective_detunings(&drive, system))?;
                    let at = average_over(&response, &samples)?;
                    row.delta_c_opt = dc;
                    row.delta_a_opt = da;
                    row.fidelity_opt = at.mean_fidelity;
                    row.efficiency_opt = at.mean_efficiency;
                }
                return Ok(row);
            }
            let bounds = OptimizationBounds::default_for(system, &cavity, options.pin_field);
            let r = optimize_with_samples(system, &cavity, &bounds, &samples)?;
            row.delta_c_opt = r.delta_c_opt;
            row.delta_a_opt = r.delta_a_opt;
            row.b_opt = r.b_opt;
            row.fidelity_opt = r.mean_fidelity;
            row.efficiency_opt = r.mean_efficiency;
            Ok(row)
        })
        .collect()
}

/// `n` points evenly spaced over `[lo, hi]` (one point when `n = 1`).
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SamplerMode;
    use crate::optimize::{landmark_parameters, optimal_coupling};
    use crate::units::{khz, mhz};

    #[test]
    fn symmetric_sweep_reaches_unit_fidelity() {
        let sys = LambdaSystem::symmetric(mhz(5.0 / 3f64.sqrt()), mhz(10.0)).unwrap();
        let ki = khz(90.0);
        let lm = landmark_parameters(ki, &sys).unwrap();
        let kopt = optimal_coupling(ki, &sys).unwrap();
        let grid = linspace(ki * 1.001, lm.kappa_ex_iii.unwrap(), 25);
        let rows = sweep_coupling(
            &sys,
            ki,
            &grid,
            &SweepOptions::default(),
            &SamplerSpec::new(SamplerMode::Haar, 500, 2),
        )
        .unwrap();
        for r in &rows {
            assert!(r.analytic);
            if r.kappa_ex <= kopt {
                assert!(r.fidelity_opt > 1.0 - 1e-9, "{r:?}");
            } else {
                assert_eq!(r.fidelity_opt, r.fidelity_0);
            }
        }
        assert!(rows[0].fidelity_0 < 0.8);
    }

    #[test]
    fn unoptimized_sweep_and_empty_range() {
        let sys = LambdaSystem::with_couplings(1.4.into(), 0.82.into(), 10.0).unwrap();
        let opts = SweepOptions {
            optimize: false,
            ..Default::default()
        };
        let rows = sweep_coupling(&sys, 0.01, &[0.03], &opts, &SamplerSpec::haar(100)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].fidelity_opt, rows[0].fidelity_0);
        assert!(sweep_coupling(&sys, 0.01, &[], &opts, &SamplerSpec::haar(100)).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(1.0, 2.0, 3), vec![1.0, 1.5, 2.0]);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
    }
}
