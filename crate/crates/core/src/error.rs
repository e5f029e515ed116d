//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Matrix dimensions do not match the operation's contract.
    #[error("shape mismatch: {context} ({left} vs {right})")]
    ShapeMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    /// A composite operator would exceed the configured dimension cap.
    #[error("dimension {requested} exceeds the maximum of {max}")]
    DimensionCap { requested: usize, max: usize },

    /// Operation requires a Hermitian input.
    #[error("matrix is not Hermitian: max |M - M†| = {deviation:.3e} exceeds {tolerance:.1e}")]
    NonHermitian { deviation: f64, tolerance: f64 },

    /// An iterative kernel failed to reach its residual contract.
    #[error("{kernel} did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence {
        kernel: &'static str,
        residual: f64,
        iterations: usize,
    },

    /// A propagated density matrix developed a negative eigenvalue.
    #[error("positivity violated at step {step}: min eigenvalue {min_eigenvalue:.3e}")]
    PositivityViolation { step: usize, min_eigenvalue: f64 },

    /// The per-step jump probability is too large for a first-order unraveling.
    #[error("time grid too coarse at step {step}: total jump probability {probability:.3e} > 0.1")]
    StepTooCoarse { step: usize, probability: f64 },

    /// The requested quantity is only defined for a resonant drive.
    #[error("drive is not resonant: omega = {drive_omega} (requires omega = omega0)")]
    NonResonantDrive { drive_omega: f64 },

    /// Ratio of moments requested where the first moment vanishes.
    #[error("undefined ratio: first moment of work is {w1:.3e}")]
    UndefinedRatio { w1: f64 },

    /// Finite-difference differentiation failed its step-size consistency check.
    #[error("finite-difference step size unreliable: Richardson disagreement {disagreement:.3e}")]
    StepSize { disagreement: f64 },

    /// A physical parameter is outside its admissible range.
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// The protocol duration does not end on an integer or half-integer
    /// number of drive cycles and instantaneous-basis measurement was not
    /// requested.
    #[error(
        "duration of {cycles} cycles does not align the measurement basis; \
         set `instantaneous_basis` to measure in the eigenbasis of H_S(tau)"
    )]
    MisalignedMeasurement { cycles: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}
