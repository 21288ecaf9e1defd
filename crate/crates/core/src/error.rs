use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("degenerate denominator in {0}")]
    Domain(&'static str),

    #[error("singular configuration: 1 + 2C̃ = 0")]
    SingularConfiguration,

    #[error(
        "birefringent splitting cannot be absorbed into magnetic quantum numbers at zero field"
    )]
    UnrepresentableBirefringence,

    #[error(
        "no real optimal detuning: κ_ex = {kappa_ex:.6e} exceeds κ_ex^opt = {kappa_ex_opt:.6e}"
    )]
    NoRealSolution { kappa_ex: f64, kappa_ex_opt: f64 },

    #[error("κ_ex = {kappa_ex:.6e} is below the intrinsic loss κ_i = {kappa_i:.6e}")]
    OutOfRange { kappa_ex: f64, kappa_i: f64 },

    #[error("landmark undefined: {0}")]
    UndefinedLandmark(&'static str),

    #[error("step size {dt:.3e} s exceeds the stability limit {limit:.3e} s")]
    StepSize { dt: f64, limit: f64 },

    #[error("integration horizon {t_max:.3e} s is shorter than 10/κ_s = {required:.3e} s")]
    Horizon { t_max: f64, required: f64 },

    #[error("non-finite amplitude at step {step}")]
    NonFinite { step: usize },

    #[error("integration would need {steps} steps (budget {budget})")]
    StepBudget { steps: u64, budget: u64 },

    #[error("sample count must be positive")]
    EmptySample,

    #[error("unknown ion preset `{0}`")]
    UnknownIon(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
