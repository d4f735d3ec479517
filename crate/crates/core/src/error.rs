use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied value violates an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported unit conversion: {from} -> {to}")]
    UnsupportedUnit { from: String, to: String },

    #[error("matrix is not Hermitian: max |H - H^dagger| = {asymmetry:e} (tolerance {tolerance:e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNoConvergence { sweeps: usize, off_norm: f64 },

    #[error("strong state mixing: eigenstate {index} has maximum basis overlap {overlap:.3} < 0.4")]
    StrongMixing { index: usize, overlap: f64 },

    #[error("mixing angle undefined: both E_perp and B_z are zero")]
    UndefinedAngle,

    #[error("sensitivity factors undefined: both B_z and E_perp are zero")]
    ZeroBias,

    /// Every noise channel has zero amplitude, so no finite coherence time exists.
    #[error("no active noise channel: coherence time is infinite")]
    InfiniteCoherence,

    #[error("time step {dt:e} s violates the resolution rule; use dt <= {suggested:e} s")]
    StepRule { dt: f64, suggested: f64 },

    #[error("found {found} spectral minima, need {needed}")]
    TooFewMinima { found: usize, needed: usize },

    #[error("missing resonance line: {0}")]
    MissingLine(String),

    #[error("least-squares problem is degenerate: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by malformed or out-of-range input, as opposed
    /// to physics-domain failures (strong mixing, no noise, step rule, ...).
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidArgument(_) | Error::UnsupportedUnit { .. })
    }
}
