//! Design and verification toolkit for single-photon Raman interaction
//! (SPRINT) SWAP gates between a trapped ion and a photonic qubit in a
//! single-sided Fabry-Perot cavity.
//!
//! The crate is organised around four pieces:
//!
//! * [`model`]: the closed-form steady-state model (amplitudes, dark/bright
//!   port probabilities, fidelity, efficiency) and averaging over input
//!   qubits.
//! * [`oracle`]: a brute-force RK4 integrator of the cascaded-system
//!   amplitude equations, used to validate the closed forms.
//! * [`optimize`]: analytic optima for symmetric Λ systems and a
//!   grid-seeded simplex optimizer for asymmetric ones, plus coupling sweeps.
//! * [`catalog`]: ion presets, mirror-to-rate conversion, Zeeman helpers.
//!
//! All rates are angular frequencies in rad/s. Use [`units`] to convert from
//! the ordinary-frequency MHz values quoted in most lab notes.

// `!(x > 0.0)` guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod model;
pub mod optimize;
pub mod oracle;
pub mod units;

pub use catalog::{CavityFlavor, IonId, IonPreset, MirrorSpec, ModePhase, Preset};
pub use error::{Error, Result};
pub use model::{
    AggregateOutcome, CavityParams, DriveSettings, EffectiveDetunings, GateOutcome,
    JointQubitState, LambdaSystem, SamplerMode, SamplerSpec, SteadyStateAmplitudes,
};
pub use optimize::{LandmarkParameters, OptimizationResult, SymmetricOptimum};
pub use oracle::{OracleConfig, OracleReport, Trajectory};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
