use thiserror::Error;

/// Errors raised by the twistor library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not hermitian")]
    NotHermitian,
    #[error("operation requires the float domain")]
    DomainMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("subspace basis is degenerate (dependent or zero columns)")]
    DegenerateBasis,
    #[error("nilpotent rank parameter k={k} out of range 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("invalid epsilon {0}; expected -1, 0 or 1")]
    BadEpsilon(i32),
    #[error("anticommutator of the pair is not a scalar matrix")]
    NotCospherical,
    #[error("operator does not square to -Id")]
    NotComplexStructure,
    #[error("operators are linearly dependent")]
    Proportional,
    #[error("nilpotent generator has odd rank {0}")]
    OddRank(usize),
    #[error("matrix is singular")]
    Singular,
    #[error("representation fails the algebra relations: {0}")]
    InvalidRep(String),
    #[error("coordinates do not satisfy the line quadric")]
    OffQuadric,
    #[error("compact lines are connected; components are undefined")]
    ConnectedLine,
    #[error("imaginary part of the period matrix is degenerate")]
    DegenerateImaginaryPart,
    #[error("(c, s) is not on the unit circle")]
    OffCircle,
    #[error("parameter must be nonzero")]
    ZeroParameter,
    #[error("base point does not lie in the real locus")]
    BaseNotInLR,
    #[error("operation needs epsilon in {expected}, got {got}")]
    WrongEpsilon { expected: &'static str, got: i32 },
    #[error("reflection generator is not normalized (B^2 = {0} Id)")]
    NotNormalized(String),
    #[error("newton solve did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("target at distance {distance:e} exceeds the step radius {radius:e}")]
    OutOfReach { distance: f64, radius: f64 },
    #[error("interpolation step became too small ({0:e})")]
    StepTooLarge(f64),
    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    /// Process exit code for this error: 1 malformed input, 2 domain error, 3 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Malformed(_) => 1,
            Error::NotConverged { .. } | Error::StepTooLarge(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
