//! Brute-force time-domain integration of the single-excitation amplitudes.
//!
//! The five amplitudes `c_1..c_5` obey a linear ODE driven by the decaying
//! seed `e^{-κ_s t}`. They are integrated with fixed-step classical RK4 from
//! an empty cavity. The output-field Gram matrices of both atomic sectors and
//! the two loss channels are carried as extra RK4 variables, so the
//! time-integrated probabilities converge at the same order as the
//! amplitudes.
//!
//! The exponential seed has a Lorentzian spectrum of width `κ_s`, so a single
//! run differs from the steady-state closed form by `O(κ_s/κ_t)`.
//! [`adiabatic_probabilities`] removes the leading term by Richardson
//! extrapolation over `κ_s` and `κ_s/2`.

mod dump;
mod suite;

pub use dump::write_trajectory;
pub use suite::{equivalence_suite, CaseResult, OracleCase, SuiteReport, MIN_KAPPA_S_RATIO};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CavityParams, EffectiveDetunings, JointQubitState, LambdaSystem};
use crate::C64;

/// Maximum number of rows kept in [`Trajectory::samples`].
pub const MAX_RECORDED: usize = 4096;

/// Steps per inverse fastest rate below which the step is rejected.
pub const MIN_STEPS_PER_RATE: f64 = 50.0;

/// Residual norm at `t_max` above which a run is considered truncated.
pub const HORIZON_TOLERANCE: f64 = 1e-6;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Seed decay `κ_s = κ_t / kappa_s_ratio`.
    pub kappa_s_ratio: f64,
    /// Horizon `t_max = horizon / κ_s`.
    pub horizon: f64,
    /// Step `dt = 1 / (steps_per_rate · fastest rate)`.
    pub steps_per_rate: f64,
    /// Refuse runs that would need more steps than this.
    pub step_budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            kappa_s_ratio: 200.0,
            horizon: 12.0,
            steps_per_rate: 64.0,
            step_budget: 200_000_000,
        }
    }
}

impl OracleConfig {
    pub fn kappa_s(&self, cavity: &CavityParams) -> f64 {
        cavity.kappa_t() / self.kappa_s_ratio
    }

    /// `(t_max, dt)` for the given rates.
    pub fn grid(
        &self,
        system: &LambdaSystem,
        cavity: &CavityParams,
        dets: &EffectiveDetunings,
        kappa_s: f64,
    ) -> Result<(f64, f64)> {
        let t_max = self.horizon / kappa_s;
        let dt = 1.0 / (self.steps_per_rate * fastest_rate(system, cavity, dets, kappa_s));
        let steps = (t_max / dt).ceil() as u64;
        if steps > self.step_budget {
            return Err(Error::StepBudget {
                steps,
                budget: self.step_budget,
            });
        }
        Ok((t_max, dt))
    }

    /// One integration at the configured `κ_s`.
    pub fn run(
        &self,
        state: &JointQubitState,
        system: &LambdaSystem,
        cavity: &CavityParams,
        dets: &EffectiveDetunings,
    ) -> Result<OracleReport> {
        self.run_at(state, system, cavity, dets, self.kappa_s(cavity))
    }

    /// One integration at an explicit `κ_s`.
    pub fn run_at(
        &self,
        state: &JointQubitState,
        system: &LambdaSystem,
        cavity: &CavityParams,
        dets: &EffectiveDetunings,
        kappa_s: f64,
    ) -> Result<OracleReport> {
        let (t_max, dt) = self.grid(system, cavity, dets, kappa_s)?;
        let traj = integrate_amplitudes(state, system, cavity, dets, kappa_s, t_max, dt)?;
        time_domain_probabilities(&traj, state.alpha_p, state.beta_p)
    }
}

/// The largest rate of the problem; sets the step size.
pub fn fastest_rate(
    system: &LambdaSystem,
    cavity: &CavityParams,
    dets: &EffectiveDetunings,
    kappa_s: f64,
) -> f64 {
    [
        cavity.kappa_t(),
        C64::new(cavity.kappa_t(), dets.delta_down).norm(),
        C64::new(cavity.kappa_t(), dets.delta_up).norm(),
        C64::new(system.gamma, dets.delta_e).norm(),
        system.g_down.norm(),
        system.g_up.norm(),
        kappa_s,
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Time-integrated output Gram matrix of one atomic sector:
/// `∫|a_out|²`, `∫|b_out|²` and `∫ a_out b_out*`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SectorGram {
    pub aa: f64,
    pub bb: f64,
    pub ab: C64,
}

impl SectorGram {
    /// `∫|w_a a_out + w_b b_out|² dt`.
    pub fn project(&self, w_a: C64, w_b: C64) -> f64 {
        w_a.norm_sqr() * self.aa + w_b.norm_sqr() * self.bb + 2.0 * (w_a * w_b.conj() * self.ab).re
    }
}

/// Accumulated flux through every exit channel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Fluxes {
    /// Output Gram matrices for the ion ending in `|↓⟩` and in `|↑⟩`.
    pub sectors: [SectorGram; 2],
    /// Cavity intrinsic loss `∫ 2κ_i Σ|c_{1..4}|²`.
    pub intrinsic: f64,
    /// Free-space emission `∫ 2γ |c_5|²`.
    pub spontaneous: f64,
}

impl Fluxes {
    const LEN: usize = 10;

    fn from_array(a: [f64; Self::LEN]) -> Self {
        Self {
            sectors: [
                SectorGram {
                    aa: a[0],
                    bb: a[1],
                    ab: C64::new(a[2], a[3]),
                },
                SectorGram {
                    aa: a[4],
                    bb: a[5],
                    ab: C64::new(a[6], a[7]),
                },
            ],
            intrinsic: a[8],
            spontaneous: a[9],
        }
    }

    /// Dark and bright port probabilities for atomic qubit `(α', β')`.
    pub fn ports(&self, alpha_p: C64, beta_p: C64) -> (f64, f64) {
        let dark = self
            .sectors
            .iter()
            .map(|g| g.project(alpha_p, beta_p))
            .sum();
        let bright = self
            .sectors
            .iter()
            .map(|g| g.project(beta_p.conj(), -alpha_p.conj()))
            .sum();
        (dark, bright)
    }

    pub fn output(&self) -> f64 {
        self.sectors.iter().map(|g| g.aa + g.bb).sum()
    }
}

/// One recorded time slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub c: [C64; 5],
    /// Seed envelope `e^{-κ_s t}`.
    pub seed: f64,
    pub fluxes: Fluxes,
}

/// Result of one integration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kappa_s: f64,
    pub dt: f64,
    pub steps: usize,
    /// Seed coefficients `(αα', αβ', βα', ββ')`.
    pub drive: [C64; 4],
    /// Decimated samples on the uniform grid, first row at `t = 0`, last at
    /// `t = steps·dt`.
    pub samples: Vec<Sample>,
    pub final_amplitudes: [C64; 5],
    pub fluxes: Fluxes,
}

impl Trajectory {
    pub fn t_max(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    /// Probability still inside the system at `t_max`: cavity and ion
    /// amplitudes plus what is left in the seeding cavity.
    pub fn residual(&self) -> f64 {
        self.final_amplitudes
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            + (-2.0 * self.kappa_s * self.t_max()).exp()
    }
}

/// Where the photon went.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub p_dark: f64,
    pub p_bright: f64,
    pub p_loss_intrinsic: f64,
    pub p_loss_spontaneous: f64,
    pub p_residual: f64,
    pub conservation_residual: f64,
    /// Seed decay of the run; for an extrapolated report, the larger of the two.
    pub kappa_s: f64,
    pub steps: usize,
}

/// `|1 − Σ channels|`.
pub fn conservation_check(report: &OracleReport) -> f64 {
    (1.0 - (report.p_dark
        + report.p_bright
        + report.p_loss_intrinsic
        + report.p_loss_spontaneous
        + report.p_residual))
        .abs()
}

struct Rhs {
    l_down: C64,
    l_up: C64,
    atom: C64,
    g_down: C64,
    g_up: C64,
    drive: [C64; 4],
    drive_scale: f64,
    out_seed: f64,
    out_cavity: f64,
    kappa_s: f64,
    two_kappa_i: f64,
    two_gamma: f64,
}

impl Rhs {
    #[inline]
    fn amplitudes(&self, t: f64, c: &[C64; 5]) -> [C64; 5] {
        let e = self.drive_scale * (-self.kappa_s * t).exp();
        let d = &self.drive;
        [
            -d[0] * e - self.l_down * c[0] - I * self.g_down.conj() * c[4],
            -d[1] * e - self.l_down * c[1],
            -d[2] * e - self.l_up * c[2],
            -d[3] * e - self.l_up * c[3] - I * self.g_up * c[4],
            -I * self.g_down * c[0] - I * self.g_up.conj() * c[3] - self.atom * c[4],
        ]
    }

    #[inline]
    fn fluxes(&self, t: f64, c: &[C64; 5]) -> [f64; Fluxes::LEN] {
        let e = self.out_seed * (-self.kappa_s * t).exp();
        let out: [C64; 4] = std::array::from_fn(|k| self.drive[k] * e + self.out_cavity * c[k]);
        // Sector ↓: (a, b) = (out0, out2); sector ↑: (out1, out3).
        let (ad, bd, au, bu) = (out[0], out[2], out[1], out[3]);
        let abd = ad * bd.conj();
        let abu = au * bu.conj();
        let cavity: f64 = c[..4].iter().map(|x| x.norm_sqr()).sum();
        [
            ad.norm_sqr(),
            bd.norm_sqr(),
            abd.re,
            abd.im,
            au.norm_sqr(),
            bu.norm_sqr(),
            abu.re,
            abu.im,
            self.two_kappa_i * cavity,
            self.two_gamma * c[4].norm_sqr(),
        ]
    }
}

#[inline]
fn axpy(y: &[C64; 5], h: f64, k: &[C64; 5]) -> [C64; 5] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

/// Integrates the amplitude equations from an empty cavity over
/// `[0, t_max]` with step `dt`.
///
/// Requires `dt ≤ 1/(50 · fastest rate)` and `t_max ≥ 10/κ_s`.
pub fn integrate_amplitudes(
    state: &JointQubitState,
    system: &LambdaSystem,
    cavity: &CavityParams,
    dets: &EffectiveDetunings,
    kappa_s: f64,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory> {
    integrate_driven(
        state.drive_products(),
        system,
        cavity,
        dets,
        kappa_s,
        t_max,
        dt,
    )
}

pub(crate) fn integrate_driven(
    drive: [C64; 4],
    system: &LambdaSystem,
    cavity: &CavityParams,
    dets: &EffectiveDetunings,
    kappa_s: f64,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(kappa_s > 0.0 && kappa_s.is_finite()) {
        return Err(Error::invalid("kappa_s", "must be positive"));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    let limit = 1.0 / (MIN_STEPS_PER_RATE * fastest_rate(system, cavity, dets, kappa_s));
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepSize { dt, limit });
    }
    let required = 10.0 / kappa_s;
    if t_max < required * (1.0 - 1e-12) {
        return Err(Error::Horizon { t_max, required });
    }
    let steps = (t_max / dt).round().max(1.0) as usize;
    let stride = steps.div_ceil(MAX_RECORDED - 1).max(1);

    let rhs = Rhs {
        l_down: C64::new(cavity.kappa_t(), dets.delta_down),
        l_up: C64::new(cavity.kappa_t(), dets.delta_up),
        atom: C64::new(system.gamma, dets.delta_e),
        g_down: system.g_down,
        g_up: system.g_up,
        drive,
        drive_scale: 2.0 * (kappa_s * cavity.kappa_ex).sqrt(),
        out_seed: (2.0 * kappa_s).sqrt(),
        out_cavity: (2.0 * cavity.kappa_ex).sqrt(),
        kappa_s,
        two_kappa_i: 2.0 * cavity.kappa_i,
        two_gamma: 2.0 * system.gamma,
    };

    let mut c = [C64::new(0.0, 0.0); 5];
    let mut q = [0.0; Fluxes::LEN];
    let mut samples = Vec::with_capacity(steps / stride + 2);
    let record = |n: usize, c: &[C64; 5], q: &[f64; Fluxes::LEN], samples: &mut Vec<Sample>| {
        let t = n as f64 * dt;
        samples.push(Sample {
            t,
            c: *c,
            seed: (-kappa_s * t).exp(),
            fluxes: Fluxes::from_array(*q),
        });
    };
    record(0, &c, &q, &mut samples);

    let h2 = 0.5 * dt;
    for n in 0..steps {
        let t = n as f64 * dt;
        let k1 = rhs.amplitudes(t, &c);
        let y2 = axpy(&c, h2, &k1);
        let k2 = rhs.amplitudes(t + h2, &y2);
        let y3 = axpy(&c, h2, &k2);
        let k3 = rhs.amplitudes(t + h2, &y3);
        let y4 = axpy(&c, dt, &k3);
        let k4 = rhs.amplitudes(t + dt, &y4);

        let f1 = rhs.fluxes(t, &c);
        let f2 = rhs.fluxes(t + h2, &y2);
        let f3 = rhs.fluxes(t + h2, &y3);
        let f4 = rhs.fluxes(t + dt, &y4);

        for i in 0..5 {
            c[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        for i in 0..Fluxes::LEN {
            q[i] += dt / 6.0 * (f1[i] + 2.0 * f2[i] + 2.0 * f3[i] + f4[i]);
        }
        if c.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::NonFinite { step: n + 1 });
        }
        if (n + 1) % stride == 0 || n + 1 == steps {
            record(n + 1, &c, &q, &mut samples);
        }
    }

    Ok(Trajectory {
        kappa_s,
        dt,
        steps,
        drive,
        samples,
        final_amplitudes: c,
        fluxes: Fluxes::from_array(q),
    })
}

/// Dark/bright probabilities and loss bookkeeping of a finished run, with the
/// beam splitter set by atomic qubit `(α', β')`.
pub fn time_domain_probabilities(
    traj: &Trajectory,
    alpha_p: C64,
    beta_p: C64,
) -> Result<OracleReport> {
    let p_residual = traj.residual();
    if p_residual > HORIZON_TOLERANCE {
        return Err(Error::Horizon {
            t_max: traj.t_max(),
            required: traj.t_max() * (p_residual / HORIZON_TOLERANCE).ln().max(1.0),
        });
    }
    let (p_dark, p_bright) = traj.fluxes.ports(alpha_p, beta_p);
    let mut report = OracleReport {
        p_dark,
        p_bright,
        p_loss_intrinsic: traj.fluxes.intrinsic,
        p_loss_spontaneous: traj.fluxes.spontaneous,
        p_residual,
        conservation_residual: 0.0,
        kappa_s: traj.kappa_s,
        steps: traj.steps,
    };
    report.conservation_residual = conservation_check(&report);
    Ok(report)
}

/// Adiabatic-limit estimate: `2 P(κ_s/2) − P(κ_s)` for every channel, with
/// `κ_s` from `config`. The conservation residual is the worse of the two
/// runs.
pub fn adiabatic_probabilities(
    state: &JointQubitState,
    system: &LambdaSystem,
    cavity: &CavityParams,
    dets: &EffectiveDetunings,
    config: &OracleConfig,
) -> Result<OracleReport> {
    let ks = config.kappa_s(cavity);
    let coarse = config.run_at(state, system, cavity, dets, ks)?;
    let fine = config.run_at(state, system, cavity, dets, 0.5 * ks)?;
    let ex = |f: f64, c: f64| 2.0 * f - c;
    Ok(OracleReport {
        p_dark: ex(fine.p_dark, coarse.p_dark),
        p_bright: ex(fine.p_bright, coarse.p_bright),
        p_loss_intrinsic: ex(fine.p_loss_intrinsic, coarse.p_loss_intrinsic),
        p_loss_spontaneous: ex(fine.p_loss_spontaneous, coarse.p_loss_spontaneous),
        p_residual: fine.p_residual.max(coarse.p_residual),
        conservation_residual: fine.conservation_residual.max(coarse.conservation_residual),
        kappa_s: ks,
        steps: fine.steps + coarse.steps,
    })
}
