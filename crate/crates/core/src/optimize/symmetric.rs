use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CavityParams, LambdaSystem};

/// Sign choice for the pair of optimal detunings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            _ => Err(Error::invalid(
                "branch",
                format!("expected plus or minus, got `{s}`"),
            )),
        }
    }
}

/// Detunings that cancel the dark-port amplitude of a symmetric Λ system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricOptimum {
    /// `δ_c^opt` for the `+` and `−` branches (rad/s).
    pub delta_c_opt: [f64; 2],
    /// `δ_a^opt` paired with each `δ_c^opt` (rad/s).
    pub delta_a_opt: [f64; 2],
    pub kappa_ex_opt: f64,
    pub eta_max: f64,
    pub intrinsic_cooperativity: f64,
}

impl SymmetricOptimum {
    /// `(δ_c, δ_a)` on one branch.
    pub fn branch(&self, branch: Branch) -> (f64, f64) {
        let k = match branch {
            Branch::Plus => 0,
            Branch::Minus => 1,
        };
        (self.delta_c_opt[k], self.delta_a_opt[k])
    }
}

/// Characteristic couplings of a symmetric system and the figures of merit there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandmarkParameters {
    /// Coupling of maximal optimal cavity detuning.
    pub kappa_ex_i: f64,
    /// Impedance-matched coupling.
    pub kappa_ex_ii: f64,
    /// Coupling at which `C_t = 1`; undefined for `C_i ≤ 1`.
    pub kappa_ex_iii: Option<f64>,
    pub delta_c_i: f64,
    pub delta_a_i: f64,
    /// Unoptimized fidelity at `κ_ex^(III)`.
    pub f_iii: Option<f64>,
    pub eta_ii: f64,
    pub eta_iii: Option<f64>,
    pub intrinsic_cooperativity: f64,
}

fn require_symmetric(system: &LambdaSystem) -> Result<()> {
    if system.has_equal_strengths() {
        Ok(())
    } else {
        Err(Error::invalid("g_up", "requires |g_down| = |g_up|"))
    }
}

/// `C_i = |g|² / (κ_i γ)`; infinite for a loss-free cavity.
pub fn intrinsic_cooperativity(kappa_i: f64, system: &LambdaSystem) -> f64 {
    system.g_down.norm_sqr() / (kappa_i * system.gamma)
}

/// Impedance-matched coupling `κ_ex^opt = κ_i √(1 + 2C_i)`.
///
/// A loss-free cavity has no finite optimum; this returns `f64::INFINITY`.
pub fn optimal_coupling(kappa_i: f64, system: &LambdaSystem) -> Result<f64> {
    require_symmetric(system)?;
    if !(kappa_i >= 0.0) {
        return Err(Error::invalid("kappa_i", "must be non-negative"));
    }
    if kappa_i == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(optimal_coupling_for(
        kappa_i,
        intrinsic_cooperativity(kappa_i, system),
    ))
}

fn optimal_coupling_for(kappa_i: f64, ci: f64) -> f64 {
    kappa_i * (1.0 + 2.0 * ci).sqrt()
}

/// Upper bound on the efficiency, `[C_i / (√(1+2C_i) + 1 + C_i)]²`.
pub fn eta_max(ci: f64) -> f64 {
    let x = ci / ((1.0 + 2.0 * ci).sqrt() + 1.0 + ci);
    x * x
}

/// Optimal probe detunings for `κ_i ≤ κ_ex ≤ κ_ex^opt`, both branches.
pub fn symmetric_optimal_detunings(
    cavity: &CavityParams,
    system: &LambdaSystem,
) -> Result<SymmetricOptimum> {
    require_symmetric(system)?;
    let (kex, ki, gamma) = (cavity.kappa_ex, cavity.kappa_i, system.gamma);
    if !(ki > 0.0) {
        return Err(Error::invalid("kappa_i", "must be positive"));
    }
    let ci = intrinsic_cooperativity(ki, system);
    let kopt = optimal_coupling_for(ki, ci);
    let tol = 1e-12;
    if kex > kopt * (1.0 + tol) {
        return Err(Error::NoRealSolution {
            kappa_ex: kex,
            kappa_ex_opt: kopt,
        });
    }
    if kex < ki * (1.0 - tol) {
        return Err(Error::OutOfRange {
            kappa_ex: kex,
            kappa_i: ki,
        });
    }
    let root = (4.0 * kex * kex * (1.0 + ci) + ki * ki * ci * ci).sqrt();
    let dc2 = ki * root - kex * kex - (1.0 + ci) * ki * ki;
    let bracket = 2.0 + 3.0 * ci - root / ki;
    // Both vanish at impedance matching; the ratio bracket/δ_c goes to zero there.
    let scale = (ki * ki * (1.0 + ci)).max(kex * kex);
    let (dc, da) = if dc2 <= 1e-10 * scale {
        if bracket.abs() > 1e-6 * (2.0 + 3.0 * ci) {
            return Err(Error::Domain("δ_a^opt diverges at κ_ex = κ_i"));
        }
        (0.0, 0.0)
    } else {
        let dc = dc2.sqrt();
        (dc, ki * gamma / (2.0 * dc) * bracket)
    };
    Ok(SymmetricOptimum {
        delta_c_opt: [dc, -dc],
        delta_a_opt: [da, -da],
        kappa_ex_opt: kopt,
        eta_max: eta_max(ci),
        intrinsic_cooperativity: ci,
    })
}

/// Characteristic couplings and figures of merit as closed-form functions of `C_i`.
pub fn landmark_parameters(kappa_i: f64, system: &LambdaSystem) -> Result<LandmarkParameters> {
    require_symmetric(system)?;
    if !(kappa_i > 0.0) {
        return Err(Error::invalid("kappa_i", "must be positive"));
    }
    let ci = intrinsic_cooperativity(kappa_i, system);
    let quad = 20.0 - 16.0 * ci + 5.0 * ci * ci;
    let above = ci > 1.0;
    Ok(LandmarkParameters {
        kappa_ex_i: 0.5 * kappa_i * ((4.0 + 8.0 * ci + 3.0 * ci * ci) / (1.0 + ci)).sqrt(),
        kappa_ex_ii: optimal_coupling_for(kappa_i, ci),
        kappa_ex_iii: above.then_some(kappa_i * (ci - 1.0)),
        delta_c_i: kappa_i * ci / (2.0 * (1.0 + ci).sqrt()),
        delta_a_i: system.gamma * (1.0 + ci).sqrt(),
        f_iii: above.then(|| 4.0 * (ci - 1.0).powi(2) / quad),
        eta_ii: eta_max(ci),
        eta_iii: above.then(|| quad / (9.0 * ci * ci)),
        intrinsic_cooperativity: ci,
    })
}

/// Large-cooperativity estimate of the fidelity gained by optimal detuning:
/// `ΔF = A/(1+A)`, `A = |κ_i/κ_ex − 1/(2C_t)|²`.
pub fn fidelity_gain_estimate(kappa_i: f64, kappa_ex: f64, c_t: f64) -> f64 {
    let a = (kappa_i / kappa_ex - 1.0 / (2.0 * c_t)).powi(2);
    a / (1.0 + a)
}
