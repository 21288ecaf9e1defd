//! Randomized comparison of the closed form against the integrator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{adiabatic_probabilities, OracleConfig, OracleReport};
use crate::error::Result;
use crate::model::{
    effective_detunings, gate_outcome, CavityParams, DriveSettings, GateOutcome, JointQubitState,
    LambdaSystem,
};
use crate::units::{mhz, BOHR_MAGNETON_RAD_PER_GAUSS};
use crate::C64;

/// Seed ratio below which the adiabatic extrapolation is no longer trusted.
pub const MIN_KAPPA_S_RATIO: f64 = 20.0;

/// One scenario: input state, system, cavity and probe settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleCase {
    pub state: JointQubitState,
    pub system: LambdaSystem,
    pub cavity: CavityParams,
    pub drive: DriveSettings,
}

impl OracleCase {
    /// Random case on a `2π × 1 MHz` rate scale. Even-numbered draws are
    /// symmetric (`g_↑ = g_↓*`); fields up to one rate unit of Larmor shift.
    pub fn random(rng: &mut impl Rng, symmetric: bool) -> Self {
        let u = mhz(1.0);
        let mut qubit = || {
            let z: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let (a, b) = (C64::new(z[0], z[1]), C64::new(z[2], z[3]));
            let n = (a.norm_sqr() + b.norm_sqr()).sqrt().max(1e-12);
            (a / n, b / n)
        };
        let (alpha, beta) = qubit();
        let (alpha_p, beta_p) = qubit();
        let gd = C64::from_polar(
            u * rng.random_range(0.5..2.5),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        let gu = if symmetric {
            gd.conj()
        } else {
            C64::from_polar(
                u * rng.random_range(0.5..2.5),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        };
        let kex = u * rng.random_range(0.3..0.9);
        let system = LambdaSystem {
            g_down: gd,
            g_up: gu,
            gamma: u * rng.random_range(0.5..2.0),
            m_down: -1.5,
            m_up: 0.5,
            m_e: -0.5,
            lande_lower: 0.8,
            lande_upper: 2.0 / 3.0,
        };
        let b = rng.random_range(0.0..1.0) * u / BOHR_MAGNETON_RAD_PER_GAUSS;
        Self {
            state: JointQubitState {
                alpha,
                beta,
                alpha_p,
                beta_p,
            },
            system,
            cavity: CavityParams {
                kappa_ex: kex,
                kappa_i: u - kex,
            },
            drive: DriveSettings::detuned(
                u * rng.random_range(-1.5..1.5),
                u * rng.random_range(-1.5..1.5),
                b,
            ),
        }
    }

    /// Closed form and extrapolated integration for this case.
    pub fn compare(&self, config: &OracleConfig) -> Result<CaseResult> {
        let dets = effective_detunings(&self.drive, &self.system);
        let closed = gate_outcome(&self.state, &self.system, &self.cavity, &dets)?;
        let oracle =
            adiabatic_probabilities(&self.state, &self.system, &self.cavity, &dets, config)?;
        Ok(CaseResult {
            deviation: (oracle.p_dark - closed.p_dark)
                .abs()
                .max((oracle.p_bright - closed.p_bright).abs()),
            closed,
            oracle,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub closed: GateOutcome,
    pub oracle: OracleReport,
    /// `max(|ΔP_D|, |ΔP_B|)`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub results: Vec<CaseResult>,
    pub max_deviation: f64,
    pub max_conservation: f64,
}

impl SuiteReport {
    pub fn from_results(results: Vec<CaseResult>) -> Self {
        let max_deviation = results.iter().map(|r| r.deviation).fold(0.0, f64::max);
        let max_conservation = results
            .iter()
            .map(|r| r.oracle.conservation_residual)
            .fold(0.0, f64::max);
        Self {
            results,
            max_deviation,
            max_conservation,
        }
    }

    pub fn passed(&self, tolerance: f64, conservation: f64) -> bool {
        self.max_deviation < tolerance && self.max_conservation < conservation
    }
}

impl OracleConfig {
    /// Warning text when `κ_s` is too large for the adiabatic comparison.
    pub fn validity_warning(&self) -> Option<String> {
        (self.kappa_s_ratio < MIN_KAPPA_S_RATIO).then(|| {
            format!(
                "κ_s = κ_t/{} is not small against κ_t (ratio below {MIN_KAPPA_S_RATIO}); \
                 the time-domain result carries O(κ_s/κ_t) corrections",
                self.kappa_s_ratio
            )
        })
    }
}

/// `cases` random scenarios from `seed`, compared in parallel. Results are
/// in draw order.
pub fn equivalence_suite(cases: usize, seed: u64, config: &OracleConfig) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drawn: Vec<OracleCase> = (0..cases)
        .map(|i| OracleCase::random(&mut rng, i % 2 == 0))
        .collect();
    let results = drawn
        .par_iter()
        .map(|c| c.compare(config))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::from_results(results))
}
