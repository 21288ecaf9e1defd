//! Closed-form steady-state model of the driven ion-cavity system.
//!
//! The ion is a Λ system: ground states `|↓⟩`, `|↑⟩` coupled to `|e⟩` by two
//! degenerate polarization modes `â` and `b̂` of a single-sided cavity. A
//! single photon enters from a seeding cavity whose decay rate `κ_s` is the
//! slowest rate in the problem, so every cavity and atomic amplitude follows
//! the exponential envelope adiabatically. In that limit the output field is
//! fixed by a handful of complex prefactors and the probabilities to leave
//! through the dark and bright ports of the atom-defined beam splitter follow
//! in closed form.

mod average;

pub use average::{
    average_gate_outcome, average_over, pairwise_sum, AggregateOutcome, Histogram, QubitSamples,
    SamplerMode, SamplerSpec, HISTOGRAM_BINS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::BOHR_MAGNETON_RAD_PER_GAUSS;
use crate::C64;

/// Efficiency below which the fidelity `P_B / (P_B + P_D)` is reported as undefined.
pub const MIN_EFFICIENCY: f64 = 1e-15;

/// Tolerance on qubit normalization.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// The three-level emitter.
///
/// `g_down` couples `|↓⟩–|e⟩` through mode `â`, `g_up` couples `|↑⟩–|e⟩`
/// through `b̂`. Both are single-photon coupling rates in rad/s (the vacuum
/// Rabi frequency is twice this value). `gamma` is the free-space amplitude
/// decay rate of `|e⟩`.
///
/// The magnetic quantum numbers are real rather than half-integer so that a
/// birefringent cavity can be folded in through
/// [`birefringence_effective_m`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaSystem {
    pub g_down: C64,
    pub g_up: C64,
    pub gamma: f64,
    pub m_down: f64,
    pub m_up: f64,
    pub m_e: f64,
    /// Landé factor of the lower manifold.
    pub lande_lower: f64,
    /// Landé factor of the upper manifold.
    pub lande_upper: f64,
}

impl LambdaSystem {
    /// A symmetric system with real equal couplings and no Zeeman structure
    /// worth mentioning (`m_↓ = -1`, `m_↑ = +1`, `m_e = 0`, `g_J = 1`).
    pub fn symmetric(g: f64, gamma: f64) -> Result<Self> {
        Self {
            g_down: C64::new(g, 0.0),
            g_up: C64::new(g, 0.0),
            gamma,
            m_down: -1.0,
            m_up: 1.0,
            m_e: 0.0,
            lande_lower: 1.0,
            lande_upper: 0.0,
        }
        .validated()
    }

    /// Same as [`LambdaSystem::symmetric`] with arbitrary complex couplings.
    pub fn with_couplings(g_down: C64, g_up: C64, gamma: f64) -> Result<Self> {
        Self {
            g_down,
            g_up,
            ..Self::symmetric(1.0, gamma)?
        }
        .validated()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma", "must be positive and finite"));
        }
        let (gd, gu) = (self.g_down.norm(), self.g_up.norm());
        if !gd.is_finite() || !gu.is_finite() {
            return Err(Error::invalid("g", "couplings must be finite"));
        }
        if gd == 0.0 && gu == 0.0 {
            return Err(Error::invalid("g", "g_down and g_up cannot both vanish"));
        }
        if self.m_down == self.m_up {
            return Err(Error::invalid(
                "m_up",
                "ground sublevels must have distinct magnetic quantum numbers",
            ));
        }
        Ok(())
    }

    pub fn validated(self) -> Result<Self> {
        self.validate().map(|_| self)
    }

    /// `|g_↓| = |g_↑|` within a relative `1e-12`.
    pub fn has_equal_strengths(&self) -> bool {
        let (a, b) = (self.g_down.norm(), self.g_up.norm());
        (a - b).abs() <= 1e-12 * a.max(b)
    }

    /// Coupling magnitude `|g_↓|` of a symmetric system.
    pub fn coupling(&self) -> f64 {
        self.g_down.norm()
    }
}

/// Field decay rates of the single-sided cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Extrinsic decay through the input-output mirror (rad/s).
    pub kappa_ex: f64,
    /// Intrinsic loss: back-mirror transmission, absorption, scattering (rad/s).
    pub kappa_i: f64,
}

impl CavityParams {
    pub fn new(kappa_ex: f64, kappa_i: f64) -> Result<Self> {
        Self { kappa_ex, kappa_i }.validated()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_ex > 0.0 && self.kappa_ex.is_finite()) {
            return Err(Error::invalid("kappa_ex", "must be positive and finite"));
        }
        if !(self.kappa_i >= 0.0 && self.kappa_i.is_finite()) {
            return Err(Error::invalid("kappa_i", "must be non-negative and finite"));
        }
        Ok(())
    }

    pub fn validated(self) -> Result<Self> {
        self.validate().map(|_| self)
    }

    /// Total field decay `κ_t = κ_ex + κ_i`.
    #[inline]
    pub fn kappa_t(&self) -> f64 {
        self.kappa_ex + self.kappa_i
    }
}

/// Probe settings: detunings, magnetic field and the seed-pulse decay rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSettings {
    /// Probe-cavity detuning (rad/s).
    pub delta_c: f64,
    /// Probe-atom detuning (rad/s).
    pub delta_a: f64,
    /// Magnetic field along the cavity axis (gauss).
    pub b_field: f64,
    /// Seeding-cavity decay rate (rad/s); only the time-domain oracle uses it.
    pub kappa_s: f64,
}

impl DriveSettings {
    /// Resonant drive at zero field. `kappa_s` is left at zero; the oracle
    /// picks its own when asked to.
    pub fn resonant() -> Self {
        Self {
            delta_c: 0.0,
            delta_a: 0.0,
            b_field: 0.0,
            kappa_s: 0.0,
        }
    }

    pub fn detuned(delta_c: f64, delta_a: f64, b_field: f64) -> Self {
        Self {
            delta_c,
            delta_a,
            b_field,
            kappa_s: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta_c.is_finite() || !self.delta_a.is_finite() {
            return Err(Error::invalid("delta", "detunings must be finite"));
        }
        if !(self.b_field >= 0.0 && self.b_field.is_finite()) {
            return Err(Error::invalid("b_field", "must be non-negative and finite"));
        }
        if !(self.kappa_s >= 0.0 && self.kappa_s.is_finite()) {
            return Err(Error::invalid("kappa_s", "must be non-negative and finite"));
        }
        Ok(())
    }
}

/// Zeeman-shifted detunings of the three single-excitation manifolds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveDetunings {
    pub delta_down: f64,
    pub delta_up: f64,
    pub delta_e: f64,
}

impl EffectiveDetunings {
    /// All three detunings equal to zero.
    pub const RESONANT: Self = Self {
        delta_down: 0.0,
        delta_up: 0.0,
        delta_e: 0.0,
    };

    /// Field-free detunings: `δ_↓ = δ_↑ = δ_c`, `δ_e = δ_a`.
    pub fn zero_field(delta_c: f64, delta_a: f64) -> Self {
        Self {
            delta_down: delta_c,
            delta_up: delta_c,
            delta_e: delta_a,
        }
    }
}

/// Photonic qubit `α|1_a⟩ + β|1_b⟩` and atomic qubit `α'|↓⟩ + β'|↑⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointQubitState {
    pub alpha: C64,
    pub beta: C64,
    pub alpha_p: C64,
    pub beta_p: C64,
}

impl JointQubitState {
    pub fn new(alpha: C64, beta: C64, alpha_p: C64, beta_p: C64) -> Result<Self> {
        let s = Self {
            alpha,
            beta,
            alpha_p,
            beta_p,
        };
        s.validate()?;
        Ok(s)
    }

    /// Real amplitudes, unchecked beyond the normalization test.
    pub fn real(alpha: f64, beta: f64, alpha_p: f64, beta_p: f64) -> Result<Self> {
        Self::new(alpha.into(), beta.into(), alpha_p.into(), beta_p.into())
    }

    /// Bloch-sphere angles: `α = cos(θ/2)`, `β = sin(θ/2) e^{iφ}` and the same
    /// for the atom.
    pub fn from_angles(theta: f64, phi: f64, theta_p: f64, phi_p: f64) -> Self {
        Self {
            alpha: C64::new((theta / 2.0).cos(), 0.0),
            beta: C64::from_polar((theta / 2.0).sin(), phi),
            alpha_p: C64::new((theta_p / 2.0).cos(), 0.0),
            beta_p: C64::from_polar((theta_p / 2.0).sin(), phi_p),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let photon = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if (photon - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(
                "alpha",
                format!("photonic qubit norm is {photon}, expected 1"),
            ));
        }
        let atom = self.alpha_p.norm_sqr() + self.beta_p.norm_sqr();
        if (atom - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(
                "alpha_p",
                format!("atomic qubit norm is {atom}, expected 1"),
            ));
        }
        Ok(())
    }

    /// Seed-drive coefficients `(αα', αβ', βα', ββ')` of the four
    /// single-photon channels `|a,↓⟩, |a,↑⟩, |b,↓⟩, |b,↑⟩`.
    #[inline]
    pub fn drive_products(&self) -> [C64; 4] {
        [
            self.alpha * self.alpha_p,
            self.alpha * self.beta_p,
            self.beta * self.alpha_p,
            self.beta * self.beta_p,
        ]
    }

    /// The atomic qubit `(α', β')`.
    #[inline]
    pub fn atomic(&self) -> (C64, C64) {
        (self.alpha_p, self.beta_p)
    }
}

/// Envelope prefactors `c_k(0)` of the five single-excitation amplitudes
/// (`c_1..c_4`: one photon in `â` or `b̂` with the ion in `|↓⟩` or `|↑⟩`;
/// `c_5`: ion excited). The full amplitude is `c_k(0) e^{-κ_s t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateAmplitudes {
    pub c: [C64; 5],
}

/// Dark/bright port probabilities of one input state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateOutcome {
    pub p_dark: f64,
    pub p_bright: f64,
    /// `P_B / (P_B + P_D)`; `None` when the efficiency is below [`MIN_EFFICIENCY`].
    pub fidelity: Option<f64>,
    /// `P_B + P_D`.
    pub efficiency: f64,
}

impl GateOutcome {
    pub fn from_probabilities(p_dark: f64, p_bright: f64) -> Self {
        let efficiency = p_dark + p_bright;
        let fidelity =
            (efficiency >= MIN_EFFICIENCY).then(|| (p_bright / efficiency).clamp(0.0, 1.0));
        Self {
            p_dark,
            p_bright,
            fidelity,
            efficiency,
        }
    }
}

/// Zeeman-shifted detunings.
///
/// The ground-state manifold shifts the two cavity-photon sectors by
/// `m_q ω_J`, the excited state shifts by `m_e ω_J'`, with
/// `ω_J = μ_B g_J B / ħ`.
pub fn effective_detunings(drive: &DriveSettings, system: &LambdaSystem) -> EffectiveDetunings {
    let omega_lower = BOHR_MAGNETON_RAD_PER_GAUSS * system.lande_lower * drive.b_field;
    let omega_upper = BOHR_MAGNETON_RAD_PER_GAUSS * system.lande_upper * drive.b_field;
    EffectiveDetunings {
        delta_down: drive.delta_c - system.m_down * omega_lower,
        delta_up: drive.delta_c - system.m_up * omega_lower,
        delta_e: drive.delta_a - system.m_e * omega_upper,
    }
}

/// Complex, detuning-dressed total cooperativity
/// `C̃_t = [|g_↓|²/(κ_t+iδ_↓) + |g_↑|²/(κ_t+iδ_↑)] / [2(γ+iδ_e)]`.
///
/// At zero detuning this is `(|g_↓|² + |g_↑|²) / (2 κ_t γ)`.
pub fn complex_cooperativity(
    system: &LambdaSystem,
    cavity: &CavityParams,
    dets: &EffectiveDetunings,
) -> Result<C64> {
    let kt = cavity.kappa_t();
    let atom = C64::new(system.gamma, dets.delta_e);
    if atom == C64::new(0.0, 0.0) {
        return Err(Error::Domain("γ + iδ_e"));
    }
    let ld = C64::new(kt, dets.delta_down);
    let lu = C64::new(kt, dets.delta_up);
    if ld.norm_sqr() == 0.0 || lu.norm_sqr() == 0.0 {
        return Err(Error::Domain("κ_t + iδ"));
    }
    Ok((system.g_down.norm_sqr() / ld + system.g_up.norm_sqr() / lu) / (2.0 * atom))
}

/// Linear response of the cavity for fixed system, cavity and detunings.
///
/// Everything that does not depend on the input qubits is computed once, so
/// evaluating many input states (averaging, optimization) costs a few complex
/// multiplications per state.
#[derive(Debug, Clone, Copy)]
pub struct GateResponse {
    g_down: C64,
    g_up: C64,
    /// `(κ_t + iδ_↓)`, `(κ_t + iδ_↑)`.
    l_down: C64,
    l_up: C64,
    /// `2κ_ex/(κ_t + iδ_q)`: bare-cavity re-emission of each mode.
    r_down: C64,
    r_up: C64,
    /// `1 / [(γ+iδ_e)(κ_t+iδ_↓)(κ_t+iδ_↑)(1 + 2C̃_t)]`.
    saturation: C64,
    cooperativity: C64,
    kappa_ex: f64,
}

impl GateResponse {
    pub fn new(
        system: &LambdaSystem,
        cavity: &CavityParams,
        dets: &EffectiveDetunings,
    ) -> Result<Self> {
        let coop = complex_cooperativity(system, cavity, dets)?;
        let one_plus = 1.0 + 2.0 * coop;
        if one_plus.norm() <= 1e-300 {
            return Err(Error::SingularConfiguration);
        }
        let kt = cavity.kappa_t();
        let l_down = C64::new(kt, dets.delta_down);
        let l_up = C64::new(kt, dets.delta_up);
        let atom = C64::new(system.gamma, dets.delta_e);
        // 2C̃/(1+2C̃) · 1/(|g_↓|²L_↑ + |g_↑|²L_↓) written without the
        // coupling-weighted denominator, which vanishes for an empty cavity.
        let saturation = 1.0 / (atom * l_down * l_up * one_plus);
        Ok(Self {
            g_down: system.g_down,
            g_up: system.g_up,
            l_down,
            l_up,
            r_down: 2.0 * cavity.kappa_ex / l_down,
            r_up: 2.0 * cavity.kappa_ex / l_up,
            saturation,
            cooperativity: coop,
            kappa_ex: cavity.kappa_ex,
        })
    }

    pub fn cooperativity(&self) -> C64 {
        self.cooperativity
    }

    /// Cavity amplitudes scaled as `√(κ_ex/κ_s) c_k(0)` for `k = 1..4`, plus
    /// the excited-state term `c_5(0) / (2i√(κ_s κ_ex))`. These are the
    /// κ_s-free quantities that enter the output field.
    #[inline]
    fn scaled(&self, state: &JointQubitState) -> ([C64; 4], C64) {
        let [aa, ab, ba, bb] = state.drive_products();
        let gd2 = self.g_down.norm_sqr();
        let gu2 = self.g_up.norm_sqr();
        let num1 = aa * gd2 * self.l_up + bb * self.g_down.conj() * self.g_up.conj() * self.l_down;
        let num4 = aa * self.g_down * self.g_up * self.l_up + bb * gu2 * self.l_down;
        let num5 = aa * self.g_down * self.l_up + bb * self.g_up.conj() * self.l_down;
        (
            [
                self.r_down * (num1 * self.saturation - aa),
                -ab * self.r_down,
                -ba * self.r_up,
                self.r_up * (num4 * self.saturation - bb),
            ],
            num5 * self.saturation,
        )
    }

    /// Steady-state envelope prefactors `c_1(0)..c_5(0)` for seed decay `κ_s`.
    pub fn amplitudes(&self, state: &JointQubitState, kappa_s: f64) -> SteadyStateAmplitudes {
        let (scaled, excited) = self.scaled(state);
        let back = (kappa_s / self.kappa_ex).sqrt();
        let c5 = C64::new(0.0, 2.0 * (kappa_s * self.kappa_ex).sqrt()) * excited;
        SteadyStateAmplitudes {
            c: [
                scaled[0] * back,
                scaled[1] * back,
                scaled[2] * back,
                scaled[3] * back,
                c5,
            ],
        }
    }

    /// Output-field amplitudes per unit seed amplitude `√(2κ_s) e^{-κ_s t}`,
    /// ordered `[a_out|↓⟩, a_out|↑⟩, b_out|↓⟩, b_out|↑⟩]`.
    #[inline]
    pub fn output_amplitudes(&self, state: &JointQubitState) -> [C64; 4] {
        let (c, _) = self.scaled(state);
        let d = state.drive_products();
        [d[0] + c[0], d[1] + c[1], d[2] + c[2], d[3] + c[3]]
    }

    /// Dark/bright probabilities for one input state.
    #[inline]
    pub fn outcome(&self, state: &JointQubitState) -> GateOutcome {
        let out = self.output_amplitudes(state);
        let (p_dark, p_bright) = beam_splitter_probabilities(&out, state.alpha_p, state.beta_p);
        GateOutcome::from_probabilities(p_dark, p_bright)
    }
}

/// Projects output amplitudes `[a↓, a↑, b↓, b↑]` onto the dark port
/// `D = α' a + β' b` and bright port `B = β'* a − α'* b`, summing over the two
/// orthogonal atomic states.
#[inline]
pub fn beam_splitter_probabilities(out: &[C64; 4], alpha_p: C64, beta_p: C64) -> (f64, f64) {
    let [a_dn, a_up, b_dn, b_up] = *out;
    let dark =
        (alpha_p * a_dn + beta_p * b_dn).norm_sqr() + (alpha_p * a_up + beta_p * b_up).norm_sqr();
    let bright = (beta_p.conj() * a_dn - alpha_p.conj() * b_dn).norm_sqr()
        + (beta_p.conj() * a_up - alpha_p.conj() * b_up).norm_sqr();
    (dark, bright)
}

/// Steady-state envelope prefactors `c_1(0)..c_5(0)`.
pub fn steady_state_amplitudes(
    state: &JointQubitState,
    system: &LambdaSystem,
    cavity: &CavityParams,
    dets: &EffectiveDetunings,
    kappa_s: f64,
) -> Result<SteadyStateAmplitudes> {
    if !(kappa_s > 0.0) {
        return Err(Error::invalid("kappa_s", "must be positive"));
    }
    Ok(GateResponse::new(system, cavity, dets)?.amplitudes(state, kappa_s))
}

/// Dark/bright probabilities, fidelity and efficiency of one input state.
pub fn gate_outcome(
    state: &JointQubitState,
    system: &LambdaSystem,
    cavity: &CavityParams,
    dets: &EffectiveDetunings,
) -> Result<GateOutcome> {
    Ok(GateResponse::new(system, cavity, dets)?.outcome(state))
}

/// Outcome composed from explicit envelope prefactors: the output field per
/// channel is the reflected seed plus `√(κ_ex/κ_s) c_k(0)`.
pub fn outcome_from_amplitudes(
    state: &JointQubitState,
    amps: &SteadyStateAmplitudes,
    kappa_ex: f64,
    kappa_s: f64,
) -> GateOutcome {
    let scale = (kappa_ex / kappa_s).sqrt();
    let d = state.drive_products();
    let out = [
        d[0] + scale * amps.c[0],
        d[1] + scale * amps.c[1],
        d[2] + scale * amps.c[2],
        d[3] + scale * amps.c[3],
    ];
    let (p_dark, p_bright) = beam_splitter_probabilities(&out, state.alpha_p, state.beta_p);
    GateOutcome::from_probabilities(p_dark, p_bright)
}

/// Folds a birefringent splitting of the two cavity polarization modes into
/// effective magnetic quantum numbers:
/// `m̃_↓ = m_↓ + (δ_cv − δ_ch)/(2ω_J)`, `m̃_↑ = m_↑ − (δ_cv − δ_ch)/(2ω_J)`.
/// The probe-cavity detuning to use alongside is the mean of the two.
pub fn birefringence_effective_m(
    m_down: f64,
    m_up: f64,
    delta_ch: f64,
    delta_cv: f64,
    omega_j: f64,
) -> Result<(f64, f64)> {
    let split = delta_cv - delta_ch;
    if split == 0.0 {
        return Ok((m_down, m_up));
    }
    if omega_j == 0.0 {
        return Err(Error::UnrepresentableBirefringence);
    }
    let shift = split / (2.0 * omega_j);
    Ok((m_down + shift, m_up - shift))
}
