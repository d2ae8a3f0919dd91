use thiserror::Error;

use crate::gaussian::ModeLabel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode {0} is not present in the registry")]
    UnknownMode(ModeLabel),

    #[error("mode {0} appears more than once")]
    DuplicateMode(ModeLabel),

    #[error("empty mode selection")]
    EmptySelection,

    #[error("non-physical covariance: {0}")]
    NonPhysical(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("zero detuning")]
    ZeroDetuning,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("stability rule violated: {0}")]
    Stability(String),

    #[error(
        "drift is not Hurwitz: eigenvalue {re:+.3e}{im:+.3e}i, undamped sector [{}]",
        join_labels(modes)
    )]
    NotHurwitz {
        re: f64,
        im: f64,
        /// Modes carrying the marginal eigenvector, strongest first.
        modes: Vec<ModeLabel>,
    },

    #[error("Fock truncation violated: top-level population {population:.3e} > {threshold:.1e}")]
    Truncation { population: f64, threshold: f64 },

    #[error("Fock basis mismatch")]
    BasisMismatch,

    #[error("operator term is not quadratic in ladder operators")]
    NotQuadratic,
}

fn join_labels(modes: &[ModeLabel]) -> String {
    modes.iter().map(ModeLabel::to_string).collect::<Vec<_>>().join(", ")
}
