use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(
        "root polishing did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error(
        "ambiguous branch pairing at grid index {index} (delta_omega = {delta_omega}); refine the detuning grid"
    )]
    AmbiguousPairing { index: usize, delta_omega: f64 },

    #[error("degenerate spectrum: residue form invalid")]
    DegenerateSpectrum,

    #[error("degenerate 2x2 spectrum")]
    DegenerateTwoLevel,

    #[error("no decay channels: total probabilities undefined")]
    NoDecayChannels,

    #[error("non-decaying mode: spectrum undefined")]
    NonDecayingMode,

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("invalid integration request: {0}")]
    InvalidIntegration(String),
}
