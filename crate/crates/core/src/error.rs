use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dipole selection rule violated: J_g = {jg}, J_e = {je}")]
    SelectionRule { jg: String, je: String },

    #[error("closed-form eigenvalues exist only for the 1/2 -> 3/2 system")]
    UnsupportedSystem,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("cannot identify the degenerate -detuning eigenvalue pair")]
    NoDegeneratePair,

    #[error("splitting {delta_at:e} smaller than |detuning| {detuning:e}")]
    SplittingBelowDetuning { delta_at: f64, detuning: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-positive gain ratio {0:e}")]
    NonPositiveRatio(f64),

    #[error("singular Liouvillian: no unique steady state (pivot ratio {0:e})")]
    SingularLiouvillian(f64),

    #[error("unresolved splitting: found {found} qualifying peak(s)")]
    UnresolvedSplitting { found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
