//! Ion presets, mirror-to-rate conversion and Zeeman helpers.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CavityParams, LambdaSystem};
use crate::units::{khz, mhz, BOHR_MAGNETON_RAD_PER_GAUSS, PPM, SPEED_OF_LIGHT};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IonId {
    Yb171,
    Ca40,
    Ba138,
}

impl IonId {
    pub const ALL: [IonId; 3] = [IonId::Yb171, IonId::Ca40, IonId::Ba138];

    pub fn name(self) -> &'static str {
        match self {
            IonId::Yb171 => "Yb171",
            IonId::Ca40 => "Ca40",
            IonId::Ba138 => "Ba138",
        }
    }
}

impl fmt::Display for IonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IonId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "yb171" | "171yb" | "yb" => Ok(IonId::Yb171),
            "ca40" | "40ca" | "ca" => Ok(IonId::Ca40),
            "ba138" | "138ba" | "ba" => Ok(IonId::Ba138),
            _ => Err(Error::UnknownIon(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CavityFlavor {
    /// Centimetre-scale cavity with bulk mirrors.
    Conventional,
    /// Fiber-tip Fabry-Perot, a few hundred microns long.
    Fiber,
}

impl FromStr for CavityFlavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "conventional" | "macroscopic" => Ok(CavityFlavor::Conventional),
            "fiber" | "fibre" => Ok(CavityFlavor::Fiber),
            _ => Err(Error::invalid(
                "flavor",
                format!("unknown cavity flavor `{s}`"),
            )),
        }
    }
}

/// Phase convention of cavity mode `b̂`.
///
/// Clebsch-Gordan coefficients carry signs (for Yb⁺ `χ_↓ = −χ_↑`). Unit
/// fidelity needs `g_↑ = g_↓*`, which holds once the relative sign is absorbed
/// into the definition of `b̂`. `SignedPhysical` keeps the raw signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModePhase {
    #[default]
    SignAbsorbed,
    SignedPhysical,
}

/// Fine-structure manifold `^{2S+1}L_J`, stored with doubled spins so the
/// values stay integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifold {
    pub two_s: u32,
    pub l: u32,
    pub two_j: u32,
}

impl Manifold {
    pub const fn new(two_s: u32, l: u32, two_j: u32) -> Self {
        Self { two_s, l, two_j }
    }

    pub fn lande_exact(&self) -> Result<Ratio<i64>> {
        lande_factor_exact(
            Ratio::new(self.two_s as i64, 2),
            Ratio::from_integer(self.l as i64),
            Ratio::new(self.two_j as i64, 2),
        )
    }

    pub fn lande(&self) -> f64 {
        let r = self.lande_exact().expect("catalog manifolds have J > 0");
        *r.numer() as f64 / *r.denom() as f64
    }
}

const S_HALF: Manifold = Manifold::new(1, 0, 1);
const P_HALF: Manifold = Manifold::new(1, 1, 1);
const D_THREE_HALF: Manifold = Manifold::new(1, 2, 3);

/// Static atomic data for one ion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IonPreset {
    pub id: IonId,
    pub transition: &'static str,
    pub wavelength_nm: f64,
    /// Free-space amplitude decay rate of `|e⟩` (rad/s).
    pub gamma: f64,
    /// Signed Clebsch-Gordan coefficients `(χ_↓, χ_↑)`.
    pub chi: (f64, f64),
    /// `(m_↓, m_↑, m_e)`.
    pub m: (f64, f64, f64),
    pub lower: Manifold,
    pub upper: Manifold,
    /// Effective g-factors used for Zeeman shifts. Equal to the manifold
    /// Landé factors except where the qubit lives in a hyperfine level.
    pub g_lower: f64,
    pub g_upper: f64,
    /// Emission from `|e⟩` into other manifolds (rad/s).
    pub gamma_other: f64,
    /// Cavity-enhanced emission rate on the qubit transition, where quoted (rad/s).
    pub purcell_rate: Option<f64>,
    /// Lifetime of the lower manifold if metastable (s).
    pub lower_lifetime_s: Option<f64>,
}

/// Mirror transmissions and cavity length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorSpec {
    pub length_m: f64,
    /// Input-output mirror transmission (ppm).
    pub t1_ppm: f64,
    /// Back-mirror transmission plus absorption and scattering (ppm).
    pub t2_plus_l_ppm: f64,
}

impl MirrorSpec {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("length", self.length_m),
            ("t1_ppm", self.t1_ppm),
            ("t2_plus_l_ppm", self.t2_plus_l_ppm),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(field, "must be positive and finite"));
            }
        }
        if self.t1_ppm + self.t2_plus_l_ppm >= 1e4 {
            return Err(Error::invalid(
                "t1_ppm",
                "total round-trip loss must stay below 10⁴ ppm",
            ));
        }
        Ok(())
    }
}

/// A ready-to-use scenario: atomic data, Λ system, cavity rates and the
/// mirrors that realize them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub ion: IonPreset,
    pub flavor: CavityFlavor,
    pub phase: ModePhase,
    pub system: LambdaSystem,
    pub cavity: CavityParams,
    pub mirrors: MirrorSpec,
}

impl Preset {
    pub fn new(id: IonId, flavor: CavityFlavor) -> Self {
        Self::with_phase(id, flavor, ModePhase::default())
    }

    pub fn with_phase(id: IonId, flavor: CavityFlavor, phase: ModePhase) -> Self {
        let ion = ion_preset(id);
        let (g_down, g_up, cavity, mirrors) = match (id, flavor) {
            (IonId::Yb171, CavityFlavor::Conventional) => {
                let g = mhz(5.0);
                (
                    ion.chi.0 * g,
                    ion.chi.1 * g,
                    CavityParams {
                        kappa_ex: khz(179.0),
                        kappa_i: khz(90.0),
                    },
                    MirrorSpec {
                        length_m: 20e-3,
                        t1_ppm: 300.0,
                        t2_plus_l_ppm: 150.0,
                    },
                )
            }
            (IonId::Yb171, CavityFlavor::Fiber) => {
                let g = mhz(70.0);
                (
                    ion.chi.0 * g,
                    ion.chi.1 * g,
                    CavityParams {
                        kappa_ex: mhz(45.0),
                        kappa_i: mhz(30.0),
                    },
                    MirrorSpec {
                        length_m: 400e-6,
                        t1_ppm: 1500.0,
                        t2_plus_l_ppm: 1000.0,
                    },
                )
            }
            // Couplings as tabulated for the D3/2–P1/2 line, already rounded.
            (_, CavityFlavor::Conventional) => (
                mhz(1.4),
                mhz(0.82),
                CavityParams {
                    kappa_ex: khz(30.0),
                    kappa_i: khz(10.0),
                },
                MirrorSpec {
                    length_m: 20e-3,
                    t1_ppm: 50.0,
                    t2_plus_l_ppm: 17.0,
                },
            ),
            (_, CavityFlavor::Fiber) => (
                mhz(28.0),
                mhz(16.0),
                CavityParams {
                    kappa_ex: mhz(18.0),
                    kappa_i: mhz(3.0),
                },
                MirrorSpec {
                    length_m: 400e-6,
                    t1_ppm: 600.0,
                    t2_plus_l_ppm: 100.0,
                },
            ),
        };
        let g_up = match phase {
            ModePhase::SignAbsorbed => g_up.abs() * g_down.signum(),
            ModePhase::SignedPhysical => g_up,
        };
        let system = LambdaSystem {
            g_down: C64::new(g_down, 0.0),
            g_up: C64::new(g_up, 0.0),
            gamma: ion.gamma,
            m_down: ion.m.0,
            m_up: ion.m.1,
            m_e: ion.m.2,
            lande_lower: ion.g_lower,
            lande_upper: ion.g_upper,
        };
        Self {
            ion,
            flavor,
            phase,
            system,
            cavity,
            mirrors,
        }
    }

    /// Looks up a preset by ion name, e.g. `"Yb171"` or `"ca40"`.
    pub fn named(ion: &str, flavor: CavityFlavor) -> Result<Self> {
        Ok(Self::new(ion.parse()?, flavor))
    }

    /// Resonant total cooperativity `(|g_↓|² + |g_↑|²) / (2 κ_t γ)`.
    pub fn cooperativity(&self) -> f64 {
        resonant_cooperativity(&self.system, &self.cavity)
    }

    /// Intrinsic cooperativity `|g_↓|² / (κ_i γ)` of the stronger arm.
    pub fn intrinsic_cooperativity(&self) -> f64 {
        self.system
            .g_down
            .norm_sqr()
            .max(self.system.g_up.norm_sqr())
            / (self.cavity.kappa_i * self.system.gamma)
    }

    pub fn gate_time(&self) -> f64 {
        gate_time_estimate(
            self.cavity.kappa_t(),
            self.cooperativity(),
            self.system.gamma,
        )
        .expect("preset rates are positive")
    }
}

/// Resonant total cooperativity `(|g_↓|² + |g_↑|²) / (2 κ_t γ)`; reduces to
/// `g²/(κ_t γ)` for a symmetric system.
pub fn resonant_cooperativity(system: &LambdaSystem, cavity: &CavityParams) -> f64 {
    (system.g_down.norm_sqr() + system.g_up.norm_sqr()) / (2.0 * cavity.kappa_t() * system.gamma)
}

/// Atomic data for `id`.
pub fn ion_preset(id: IonId) -> IonPreset {
    match id {
        IonId::Yb171 => IonPreset {
            id,
            transition: "2S1/2 (F=1) - 2P1/2 (F'=0)",
            wavelength_nm: 370.0,
            gamma: mhz(9.8),
            chi: (1.0 / 3f64.sqrt(), -1.0 / 3f64.sqrt()),
            m: (-1.0, 1.0, 0.0),
            lower: S_HALF,
            upper: P_HALF,
            // Hyperfine g_F of 2S1/2 F=1 (I=1/2). Catalog default: the symmetric
            // analysis runs at zero field, where it never enters.
            g_lower: 1.0,
            // F'=0 has no Zeeman shift.
            g_upper: 0.0,
            gamma_other: 0.0,
            purcell_rate: None,
            lower_lifetime_s: None,
        },
        IonId::Ca40 | IonId::Ba138 => {
            let ca = id == IonId::Ca40;
            IonPreset {
                id,
                transition: "2D3/2 - 2P1/2",
                wavelength_nm: if ca { 866.0 } else { 650.0 },
                gamma: mhz(10.0),
                chi: ((0.5f64).sqrt(), (1.0f64 / 6.0).sqrt()),
                m: (-1.5, 0.5, -0.5),
                lower: D_THREE_HALF,
                upper: P_HALF,
                g_lower: D_THREE_HALF.lande(),
                g_upper: P_HALF.lande(),
                gamma_other: mhz(if ca { 10.3 } else { 7.2 }),
                purcell_rate: Some(mhz(if ca { 2.5 } else { 8.0 })),
                lower_lifetime_s: Some(if ca { 1.0 } else { 18.0 }),
            }
        }
    }
}

/// `g_J = 3/2 + [S(S+1) − L(L+1)] / [2J(J+1)]` in exact arithmetic.
pub fn lande_factor_exact(s: Ratio<i64>, l: Ratio<i64>, j: Ratio<i64>) -> Result<Ratio<i64>> {
    if j <= Ratio::from_integer(0) {
        return Err(Error::invalid("J", "must be positive"));
    }
    let one = Ratio::from_integer(1);
    Ok(Ratio::new(3, 2)
        + (s * (s + one) - l * (l + one)) / (Ratio::from_integer(2) * j * (j + one)))
}

/// Floating-point Landé factor.
pub fn lande_factor(s: f64, l: f64, j: f64) -> Result<f64> {
    if !(j > 0.0) {
        return Err(Error::invalid("J", "must be positive"));
    }
    Ok(1.5 + (s * (s + 1.0) - l * (l + 1.0)) / (2.0 * j * (j + 1.0)))
}

/// Larmor frequency `μ_B g_J B / ħ` (rad/s).
pub fn larmor_frequency(g_j: f64, b_gauss: f64) -> f64 {
    BOHR_MAGNETON_RAD_PER_GAUSS * g_j * b_gauss
}

/// Decay rates and finesse of a single-sided cavity:
/// `κ_ex = c T₁/(4ℓ)`, `κ_i = c (T₂+L)/(4ℓ)`, `F = 2π/(T₁+T₂+L)`.
pub fn cavity_from_mirrors(spec: &MirrorSpec) -> Result<(CavityParams, f64)> {
    spec.validate()?;
    let scale = SPEED_OF_LIGHT / (4.0 * spec.length_m);
    let t1 = spec.t1_ppm * PPM;
    let t2 = spec.t2_plus_l_ppm * PPM;
    let cavity = CavityParams::new(scale * t1, scale * t2)?;
    Ok((cavity, std::f64::consts::TAU / (t1 + t2)))
}

/// Mirror transmission (ppm) that yields decay rate `kappa` at length `length_m`.
pub fn transmission_ppm(kappa: f64, length_m: f64) -> f64 {
    4.0 * length_m * kappa / SPEED_OF_LIGHT / PPM
}

/// Efficiency after discarding decays into other manifolds:
/// `η̃ = η Γ / (Γ + γ_other)`.
pub fn postselected_efficiency(eta: f64, purcell_rate: f64, gamma_other: f64) -> Result<f64> {
    if !(purcell_rate > 0.0) {
        return Err(Error::invalid("Gamma", "must be positive"));
    }
    if !(gamma_other >= 0.0) {
        return Err(Error::invalid("gamma_other", "must be non-negative"));
    }
    Ok(eta * purcell_rate / (purcell_rate + gamma_other))
}

/// Order-of-magnitude gate duration `3 max(1/κ_t, 1/(Cγ))` (s).
pub fn gate_time_estimate(kappa_t: f64, cooperativity: f64, gamma: f64) -> Result<f64> {
    if !(kappa_t > 0.0 && cooperativity > 0.0 && gamma > 0.0) {
        return Err(Error::invalid("rates", "must be positive"));
    }
    Ok(3.0 * (1.0 / kappa_t).max(1.0 / (cooperativity * gamma)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{to_khz, to_mhz};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn lande_textbook_values() {
        assert_eq!(S_HALF.lande_exact().unwrap(), Ratio::from_integer(2));
        assert_eq!(P_HALF.lande_exact().unwrap(), Ratio::new(2, 3));
        assert_eq!(D_THREE_HALF.lande_exact().unwrap(), Ratio::new(4, 5));
        assert_abs_diff_eq!(lande_factor(0.5, 2.0, 1.5).unwrap(), 0.8, epsilon = 1e-15);
        assert!(lande_factor(0.0, 0.0, 0.0).is_err());
        assert!(lande_factor_exact(
            Ratio::from_integer(0),
            Ratio::from_integer(0),
            Ratio::from_integer(0)
        )
        .is_err());
    }

    #[test]
    fn larmor_values() {
        assert_eq!(larmor_frequency(2.0, 0.0), 0.0);
        assert_relative_eq!(
            to_mhz(larmor_frequency(1.0, 1.0)),
            1.3996,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            to_mhz(larmor_frequency(0.8, 8.5)),
            9.517,
            max_relative = 1e-3
        );
    }

    #[test]
    fn mirror_conversion() {
        let (cav, fin) =
            cavity_from_mirrors(&Preset::new(IonId::Yb171, CavityFlavor::Conventional).mirrors)
                .unwrap();
        assert_relative_eq!(to_khz(cav.kappa_ex), 179.0, max_relative = 0.01);
        assert_relative_eq!(to_khz(cav.kappa_i), 90.0, max_relative = 0.01);
        assert_relative_eq!(fin, 1.4e4, max_relative = 0.01);
        let spec = MirrorSpec {
            length_m: 0.013,
            t1_ppm: 77.0,
            t2_plus_l_ppm: 12.5,
        };
        let (cav, _) = cavity_from_mirrors(&spec).unwrap();
        assert_relative_eq!(
            transmission_ppm(cav.kappa_ex, spec.length_m),
            77.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            transmission_ppm(cav.kappa_i, spec.length_m),
            12.5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn mirror_validation() {
        let bad = MirrorSpec {
            length_m: 0.02,
            t1_ppm: 9000.0,
            t2_plus_l_ppm: 2000.0,
        };
        assert!(cavity_from_mirrors(&bad).is_err());
        assert!(cavity_from_mirrors(&MirrorSpec {
            length_m: 0.0,
            ..bad
        })
        .is_err());
    }

    #[test]
    fn preset_examples() {
        let yb = Preset::new(IonId::Yb171, CavityFlavor::Conventional);
        assert_relative_eq!(to_khz(yb.cavity.kappa_i), 90.0, max_relative = 1e-12);
        assert_relative_eq!(to_mhz(yb.system.g_down.norm()), 2.9, max_relative = 0.01);
        assert_eq!(yb.system.g_down, yb.system.g_up);
        let signed = Preset::with_phase(
            IonId::Yb171,
            CavityFlavor::Conventional,
            ModePhase::SignedPhysical,
        );
        assert_eq!(signed.system.g_up, -signed.system.g_down);

        let ca = Preset::named("Ca40", CavityFlavor::Conventional).unwrap();
        assert_relative_eq!(to_mhz(ca.system.g_down.re), 1.4, max_relative = 1e-12);
        assert_relative_eq!(to_mhz(ca.system.g_up.re), 0.82, max_relative = 1e-12);
        assert_relative_eq!(to_khz(ca.cavity.kappa_ex), 30.0, max_relative = 1e-12);
        assert_relative_eq!(to_khz(ca.cavity.kappa_i), 10.0, max_relative = 1e-12);

        let ba = Preset::named("ba138", CavityFlavor::Fiber).unwrap();
        assert_relative_eq!(to_mhz(ba.system.g_down.re), 28.0, max_relative = 1e-12);
        assert_relative_eq!(to_mhz(ba.system.g_up.re), 16.0, max_relative = 1e-12);
        assert_relative_eq!(to_mhz(ba.cavity.kappa_ex), 18.0, max_relative = 1e-12);
        assert_relative_eq!(to_mhz(ba.cavity.kappa_i), 3.0, max_relative = 1e-12);

        assert_eq!(
            "Sr88".parse::<IonId>().unwrap_err(),
            Error::UnknownIon("Sr88".into())
        );
    }

    #[test]
    fn tabulated_couplings_follow_clebsch_gordan() {
        let ion = ion_preset(IonId::Ca40);
        let ratio = ion.chi.0 / ion.chi.1;
        assert_relative_eq!(1.4 / 0.82, ratio, max_relative = 0.02);
        assert_relative_eq!(28.0 / 16.0, ratio, max_relative = 0.02);
    }

    #[test]
    fn zeeman_factors_of_presets() {
        let ca = ion_preset(IonId::Ca40);
        assert_eq!(ca.g_lower, 0.8);
        assert_abs_diff_eq!(ca.g_upper, 2.0 / 3.0, epsilon = 1e-15);
        for id in IonId::ALL {
            let p = Preset::new(id, CavityFlavor::Fiber);
            p.system.validate().unwrap();
            assert!(p.ion.chi.0.abs() <= 1.0 && p.ion.chi.1.abs() <= 1.0);
        }
    }

    #[test]
    fn postselection_and_gate_time() {
        assert_relative_eq!(postselected_efficiency(0.4, 1.0, 0.0).unwrap(), 0.4);
        assert_abs_diff_eq!(
            postselected_efficiency(1.0, mhz(8.0), mhz(7.2)).unwrap(),
            0.526,
            epsilon = 1e-3
        );
        assert!(postselected_efficiency(1.0, 0.0, 1.0).is_err());
        assert_relative_eq!(gate_time_estimate(2.0, 1.0, 2.0).unwrap(), 1.5);
        assert!(gate_time_estimate(0.0, 1.0, 1.0).is_err());
    }
}
