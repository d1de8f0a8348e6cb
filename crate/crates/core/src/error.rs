use core::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Pipeline stage that refused to continue because its input was too far
/// from the regime where the construction is guaranteed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// `‖p − q‖ ≥ 1` in the projection intertwiner.
    ProjectionIntertwiner,
    /// `δ = ‖(t+t*)/2 − e_B‖ ≥ 1/2` in the close homomorphism.
    CloseHomomorphism,
    /// `‖s − I‖ ≥ 1` in the intertwining unitary.
    IntertwiningUnitary,
    /// `‖eps‖` outside the range of the near-identity unitary generator.
    RandomUnitary,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::ProjectionIntertwiner => "projection_intertwiner",
            Stage::CloseHomomorphism => "close_homomorphism",
            Stage::IntertwiningUnitary => "intertwining_unitary",
            Stage::RandomUnitary => "random_unitary",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is not invertible (smallest singular value {sigma_min:e})")]
    NotInvertible { sigma_min: f64 },
    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("{stage}: value {value:e} violates the bound {limit}")]
    TooFar { stage: Stage, value: f64, limit: f64 },
    #[error("eps = {eps} is outside [0, 2)")]
    EpsOutOfRange { eps: f64 },
    #[error("subalgebra is not contained in the ambient algebra (residual {residual:e})")]
    NotNested { residual: f64 },
    #[error("algebra is not intermediate between target and source (residual {residual:e})")]
    NotIntermediate { residual: f64 },
    #[error("compatibility residual {residual:e} exceeds tolerance")]
    CompatibilityResidualExceeded { residual: f64 },
    #[error("frame operator is singular (min eigenvalue {min_eigenvalue:e})")]
    SingularFrame { min_eigenvalue: f64 },
    #[error("precondition failed: {0}")]
    PreconditionFailed(&'static str),
    #[error("localizing form is degenerate (min eigenvalue {min_eigenvalue:e})")]
    DegenerateForm { min_eigenvalue: f64 },
    #[error("element is not in the algebra (residual {residual:e})")]
    NotInAlgebra { residual: f64 },
    #[error("a compatible expectation is required (residual {residual:e})")]
    CompatibilityRequired { residual: f64 },
    #[error("dual expectation is ill-defined (least-squares residual {residual:e})")]
    IllDefined { residual: f64 },
    #[error("read-back of the homomorphism left the codomain (residual {residual:e})")]
    ReadbackFailed { residual: f64 },
    #[error("conjugation check failed (residual {residual:e})")]
    ConjugationFailed { residual: f64 },
    #[error("span is not a unital *-subalgebra (residual {residual:e})")]
    NotAnAlgebra { residual: f64 },
}

impl Error {
    /// True for failures that mean "the inputs are too far apart", as opposed
    /// to numerical breakdown or caller mistakes.
    pub fn is_too_far(&self) -> bool {
        matches!(self, Error::TooFar { .. })
    }

    /// True for failures of a numerical construction on valid input.
    pub fn is_numerical_breakdown(&self) -> bool {
        matches!(
            self,
            Error::NotInvertible { .. }
                | Error::SingularFrame { .. }
                | Error::DegenerateForm { .. }
                | Error::IllDefined { .. }
                | Error::ReadbackFailed { .. }
                | Error::ConjugationFailed { .. }
                | Error::CompatibilityResidualExceeded { .. }
        )
    }
}
