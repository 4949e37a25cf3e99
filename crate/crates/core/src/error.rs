use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("the atoms do not couple to the reservoir (W = 0 or alpha1 = alpha2 = 0)")]
    NoCoupling,

    #[error("initial amplitudes are both zero")]
    ZeroInitialState,

    #[error("initial amplitudes are not normalized (|c10|^2 + |c20|^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("atomic population {population} exceeds 1")]
    PopulationExceedsUnity { population: f64 },

    #[error("characteristic roots are nearly degenerate (min separation {min_separation:e}); use an ODE solver")]
    DegenerateRoots { min_separation: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
}
