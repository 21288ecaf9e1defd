//! Scenario files. Frequencies are ordinary MHz (converted ×2π on load),
//! fields in gauss, mirror length in mm, transmissions in ppm, angles in
//! radians.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sprint_core::catalog::cavity_from_mirrors;
use sprint_core::optimize::{Branch, OptimizationBounds};
use sprint_core::oracle::OracleConfig;
use sprint_core::units::{mhz, to_mhz};
use sprint_core::{
    CavityFlavor, CavityParams, DriveSettings, IonId, JointQubitState, LambdaSystem, MirrorSpec,
    ModePhase, Preset, SamplerMode, SamplerSpec, C64,
};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Default output path when `--out` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirrors: Option<MirrorConfig>,
    #[serde(default)]
    pub drive: DriveConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetRef {
    pub ion: String,
    pub flavor: CavityFlavor,
    #[serde(default)]
    pub phase: ModePhase,
}

/// Real coupling, or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coupling {
    Real(f64),
    Complex([f64; 2]),
}

impl Coupling {
    fn to_rad(self) -> C64 {
        match self {
            Coupling::Real(g) => C64::new(mhz(g), 0.0),
            Coupling::Complex([re, im]) => C64::new(mhz(re), mhz(im)),
        }
    }

    fn from_rad(g: C64) -> Self {
        if g.im == 0.0 {
            Coupling::Real(to_mhz(g.re))
        } else {
            Coupling::Complex([to_mhz(g.re), to_mhz(g.im)])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub g_down_mhz: Coupling,
    pub g_up_mhz: Coupling,
    pub gamma_mhz: f64,
    /// `[m_↓, m_↑, m_e]`
    #[serde(default = "default_m")]
    pub m: [f64; 3],
    /// `[g_lower, g_upper]`
    #[serde(default = "default_lande")]
    pub lande: [f64; 2],
}

fn default_m() -> [f64; 3] {
    [-1.0, 1.0, 0.0]
}

fn default_lande() -> [f64; 2] {
    [1.0, 0.0]
}

impl SystemConfig {
    fn build(&self) -> CliResult<LambdaSystem> {
        Ok(LambdaSystem {
            g_down: self.g_down_mhz.to_rad(),
            g_up: self.g_up_mhz.to_rad(),
            gamma: mhz(self.gamma_mhz),
            m_down: self.m[0],
            m_up: self.m[1],
            m_e: self.m[2],
            lande_lower: self.lande[0],
            lande_upper: self.lande[1],
        }
        .validated()?)
    }

    pub fn from_system(s: &LambdaSystem) -> Self {
        Self {
            g_down_mhz: Coupling::from_rad(s.g_down),
            g_up_mhz: Coupling::from_rad(s.g_up),
            gamma_mhz: to_mhz(s.gamma),
            m: [s.m_down, s.m_up, s.m_e],
            lande: [s.lande_lower, s.lande_upper],
        }
    }
}

/// Either rate may be omitted when a preset supplies it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_ex_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_i_mhz: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorConfig {
    pub length_mm: f64,
    pub t1_ppm: f64,
    pub t2_plus_l_ppm: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    #[serde(default)]
    pub delta_c_mhz: f64,
    #[serde(default)]
    pub delta_a_mhz: f64,
    #[serde(default)]
    pub b_gauss: f64,
    /// Use the closed-form optimal detunings of a symmetric system instead
    /// of the values above.
    #[serde(default)]
    pub symmetric_optimum: bool,
    #[serde(default)]
    pub branch: Branch,
}

/// Single input `(cos θ/2, e^{iφ} sin θ/2) ⊗ (cos θ'/2, e^{iφ'} sin θ'/2)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
    pub theta_p: f64,
    #[serde(default)]
    pub phi_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    #[serde(default)]
    pub mode: SamplerMode,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_count() -> usize {
    SamplerSpec::DEFAULT_COUNT
}

fn default_seed() -> u64 {
    SamplerSpec::DEFAULT_SEED
}

/// Search intervals; omitted entries use the library defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub delta_c_mhz: Option<[f64; 2]>,
    pub delta_a_mhz: Option<[f64; 2]>,
    pub b_gauss: Option<[f64; 2]>,
    /// Defaults to true for fiber presets.
    pub pin_field: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Inclusive `[lo, hi]`.
    pub kappa_ex_mhz: [f64; 2],
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_true")]
    pub optimize: bool,
}

fn default_points() -> usize {
    25
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_cases")]
    pub cases: usize,
    #[serde(default = "default_oracle_seed")]
    pub seed: u64,
    #[serde(default = "default_ratio")]
    pub kappa_s_ratio: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_steps")]
    pub steps_per_rate: f64,
    /// Allowed `max |ΔP|`.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_cases() -> usize {
    100
}
fn default_oracle_seed() -> u64 {
    1
}
fn default_ratio() -> f64 {
    OracleConfig::default().kappa_s_ratio
}
fn default_horizon() -> f64 {
    OracleConfig::default().horizon
}
fn default_steps() -> f64 {
    OracleConfig::default().steps_per_rate
}
fn default_tolerance() -> f64 {
    1e-4
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            cases: default_cases(),
            seed: default_oracle_seed(),
            kappa_s_ratio: default_ratio(),
            horizon: default_horizon(),
            steps_per_rate: default_steps(),
            tolerance: default_tolerance(),
        }
    }
}

impl OracleSection {
    pub fn config(&self) -> OracleConfig {
        OracleConfig {
            kappa_s_ratio: self.kappa_s_ratio,
            horizon: self.horizon,
            steps_per_rate: self.steps_per_rate,
            ..Default::default()
        }
    }
}

/// Command-line overrides applied on top of a file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub mode: Option<SamplerMode>,
    pub branch: Option<Branch>,
}

/// A config with units converted and presets expanded.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub system: LambdaSystem,
    pub cavity: CavityParams,
    pub drive: DriveSettings,
    pub symmetric_optimum: bool,
    pub branch: Branch,
    pub state: Option<JointQubitState>,
    /// `None` when neither the file nor the flags ask for sampling.
    pub sampler: Option<SamplerSpec>,
    pub bounds: OptimizationBounds,
    pub sweep: Option<SweepConfig>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Config equivalent to a preset, with the system and cavity written out
    /// so that individual fields can be edited.
    pub fn from_preset(p: &Preset) -> Self {
        Self {
            system: Some(SystemConfig::from_system(&p.system)),
            mirrors: Some(MirrorConfig {
                length_mm: p.mirrors.length_m * 1e3,
                t1_ppm: p.mirrors.t1_ppm,
                t2_plus_l_ppm: p.mirrors.t2_plus_l_ppm,
            }),
            sampler: Some(SamplerConfig {
                mode: SamplerMode::default(),
                count: default_count(),
                seed: default_seed(),
            }),
            bounds: (p.flavor == CavityFlavor::Fiber).then_some(BoundsConfig {
                pin_field: Some(true),
                ..Default::default()
            }),
            ..Default::default()
        }
    }

    pub fn resolve(&self, ov: &Overrides) -> CliResult<Scenario> {
        let preset = match &self.preset {
            Some(r) => {
                let id: IonId = r.ion.parse()?;
                Some(Preset::with_phase(id, r.flavor, r.phase))
            }
            None => None,
        };
        let system = match (&preset, &self.system) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either [preset] or [system], not both".into(),
                ))
            }
            (None, None) => return Err(CliError::Config("missing [preset] or [system]".into())),
            (Some(p), None) => p.system,
            (None, Some(s)) => s.build()?,
        };
        let cavity = match (&self.cavity, &self.mirrors) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either [cavity] or [mirrors], not both".into(),
                ))
            }
            (None, Some(m)) => {
                let spec = MirrorSpec {
                    length_m: m.length_mm * 1e-3,
                    t1_ppm: m.t1_ppm,
                    t2_plus_l_ppm: m.t2_plus_l_ppm,
                };
                cavity_from_mirrors(&spec)?.0
            }
            (c, None) => {
                let base = preset.as_ref().map(|p| p.cavity);
                let c = c.unwrap_or_default();
                let pick = |v: Option<f64>, from: Option<f64>, name: &str| {
                    v.map(mhz)
                        .or(from)
                        .ok_or_else(|| CliError::Config(format!("missing cavity.{name}")))
                };
                CavityParams::new(
                    pick(c.kappa_ex_mhz, base.map(|b| b.kappa_ex), "kappa_ex_mhz")?,
                    pick(c.kappa_i_mhz, base.map(|b| b.kappa_i), "kappa_i_mhz")?,
                )?
            }
        };
        let drive = DriveSettings::detuned(
            mhz(self.drive.delta_c_mhz),
            mhz(self.drive.delta_a_mhz),
            self.drive.b_gauss,
        );
        drive.validate()?;
        let state = self
            .state
            .map(|s| JointQubitState::from_angles(s.theta, s.phi, s.theta_p, s.phi_p));

        let requested = self.sampler.is_some()
            || ov.seed.is_some()
            || ov.samples.is_some()
            || ov.mode.is_some();
        let sampler = requested.then(|| {
            let base = self.sampler.unwrap_or(SamplerConfig {
                mode: SamplerMode::default(),
                count: default_count(),
                seed: default_seed(),
            });
            SamplerSpec::new(
                ov.mode.unwrap_or(base.mode),
                ov.samples.unwrap_or(base.count),
                ov.seed.unwrap_or(base.seed),
            )
        });

        let flavor = preset.as_ref().map(|p| p.flavor);
        let b = self.bounds.unwrap_or_default();
        let pin = b.pin_field.unwrap_or(flavor == Some(CavityFlavor::Fiber));
        let mut bounds = OptimizationBounds::default_for(&system, &cavity, pin);
        if let Some([lo, hi]) = b.delta_c_mhz {
            bounds.delta_c = [mhz(lo), mhz(hi)];
        }
        if let Some([lo, hi]) = b.delta_a_mhz {
            bounds.delta_a = [mhz(lo), mhz(hi)];
        }
        if let Some(f) = b.b_gauss {
            if pin {
                return Err(CliError::Config(
                    "bounds.b_gauss conflicts with pin_field".into(),
                ));
            }
            bounds.b_field = f;
        }
        bounds.validate()?;

        Ok(Scenario {
            system,
            cavity,
            drive,
            symmetric_optimum: self.drive.symmetric_optimum,
            branch: ov.branch.unwrap_or(self.drive.branch),
            state,
            sampler,
            bounds,
            sweep: self.sweep,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> CliResult<Scenario> {
        ScenarioConfig::parse(text)?.resolve(&Overrides::default())
    }

    #[test]
    fn preset_with_cavity_override() {
        let s = resolve(
            "[preset]\nion = \"yb171\"\nflavor = \"conventional\"\n[cavity]\nkappa_ex_mhz = 0.135\n",
        )
        .unwrap();
        assert!((s.cavity.kappa_ex - mhz(0.135)).abs() < 1e-9);
        assert!((s.cavity.kappa_i - mhz(0.09)).abs() < 1e-9);
        assert!(s.sampler.is_none());
        assert!(s.bounds.b_field[1] > 0.0);
    }

    #[test]
    fn fiber_preset_pins_field() {
        let s = resolve("[preset]\nion = \"ca40\"\nflavor = \"fiber\"\n").unwrap();
        assert_eq!(s.bounds.b_field, [0.0, 0.0]);
    }

    #[test]
    fn inline_system_with_complex_coupling() {
        let s = resolve(
            "[system]\ng_down_mhz = [1.0, 1.0]\ng_up_mhz = [1.0, -1.0]\ngamma_mhz = 10\n\
             [mirrors]\nlength_mm = 20\nt1_ppm = 300\nt2_plus_l_ppm = 150\n[sampler]\nmode = \"theta-grid\"\ncount = 100\n",
        )
        .unwrap();
        assert_eq!(s.system.g_up, s.system.g_down.conj());
        assert!((to_mhz(s.cavity.kappa_ex) - 0.1789).abs() < 1e-3);
        assert_eq!(s.sampler.unwrap().mode, SamplerMode::ThetaGrid);
    }

    #[test]
    fn exclusive_sections_and_unknown_fields() {
        assert!(resolve("").is_err());
        assert!(resolve(
            "[preset]\nion = \"ca40\"\nflavor = \"fiber\"\n[system]\ng_down_mhz = 1\ng_up_mhz = 1\ngamma_mhz = 1\n"
        )
        .is_err());
        assert!(ScenarioConfig::parse("[drive]\ndelta_x = 1\n").is_err());
        assert!(resolve("[preset]\nion = \"xe\"\nflavor = \"fiber\"\n").is_err());
        assert!(
            resolve("[preset]\nion = \"ca40\"\nflavor = \"fiber\"\n[drive]\nb_gauss = -1\n")
                .is_err()
        );
    }

    #[test]
    fn overrides_enable_sampling() {
        let cfg =
            ScenarioConfig::parse("[preset]\nion = \"ca40\"\nflavor = \"conventional\"\n").unwrap();
        let s = cfg
            .resolve(&Overrides {
                samples: Some(64),
                ..Default::default()
            })
            .unwrap();
        let sp = s.sampler.unwrap();
        assert_eq!((sp.count, sp.seed), (64, SamplerSpec::DEFAULT_SEED));
    }

    #[test]
    fn preset_round_trips_through_toml() {
        for id in IonId::ALL {
            for flavor in [CavityFlavor::Conventional, CavityFlavor::Fiber] {
                let p = Preset::new(id, flavor);
                let text = toml::to_string(&ScenarioConfig::from_preset(&p)).unwrap();
                let s = resolve(&text).unwrap();
                assert!((s.system.g_down - p.system.g_down).norm() < 1e-6 * p.system.g_down.norm());
                assert!(
                    (s.cavity.kappa_t() - p.cavity.kappa_t()).abs() < 0.01 * p.cavity.kappa_t()
                );
            }
        }
    }
}
