use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not unitary (max deviation {deviation:.3e} > {tolerance:.1e})")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("matrix is not hermitian (max deviation {deviation:.3e} > {tolerance:.1e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("determinant is not 1 (|det - 1| = {0:.3e})")]
    NotSpecial(f64),

    #[error("expected a 2x2 unitary, got dimension {0}")]
    NotQubit(usize),

    #[error("hermitian matrix is not traceless (|tr H| = {trace:.3e}, ||H|| = {norm:.3e})")]
    NotTraceless { trace: f64, norm: f64 },

    #[error("rotation angle {angle} is outside the attainable range [0, {max}]")]
    AngleOutOfRange { angle: f64, max: f64 },

    #[error("unitary is too far from the identity for an approximate commutator (d(I,U) = {0:.3e})")]
    TooFarFromIdentity(f64),

    #[error("approx-comm preconditions violated: {0}")]
    Precondition(String),

    #[error("instruction set: {0}")]
    InstructionSet(String),

    #[error("gate index {0} out of range")]
    UnknownGate(usize),

    #[error(
        "net too large: level {level} would hold about {estimate} entries (budget {budget}); \
         backtrack-pruned bound for l0 = {l0} is {bound:.3e} sequences"
    )]
    NetTooLarge {
        level: usize,
        estimate: usize,
        budget: usize,
        l0: usize,
        bound: f64,
    },

    #[error("net file: {0}")]
    NetFormat(String),

    #[error("net fingerprint {found} does not match instruction set fingerprint {expected}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("net has not been audited; run an audit to set the measured eps0")]
    NotAudited,

    #[error("measured eps0 {measured:.4} exceeds the {mode} threshold {threshold:.4}")]
    NetTooCoarse {
        measured: f64,
        threshold: f64,
        mode: &'static str,
    },

    #[error("commutator decomposition failed at level {level}: {source}")]
    Decomposition {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "theoretical regime requires eps0 * c_approx^2 < 1 (got {0:.4}); use calibrated mode"
    )]
    OutsideTheoreticalRegime(f64),

    #[error("target accuracy {target:.3e} is unreachable within depth cap {cap}")]
    Unreachable { target: f64, cap: usize },

    #[error("flattened sequence would hold {0} gates, above the configured cap {1}")]
    SequenceTooLong(u128, u128),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("target: {0}")]
    Target(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by numerical preconditions rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotUnitary { .. }
                | Error::NotHermitian { .. }
                | Error::NotSpecial(_)
                | Error::NotTraceless { .. }
                | Error::AngleOutOfRange { .. }
                | Error::TooFarFromIdentity(_)
                | Error::Precondition(_)
                | Error::NetTooLarge { .. }
                | Error::NotAudited
                | Error::NetTooCoarse { .. }
                | Error::Decomposition { .. }
                | Error::OutsideTheoreticalRegime(_)
                | Error::Unreachable { .. }
                | Error::SequenceTooLong(..)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
