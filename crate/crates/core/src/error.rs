use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not symmetric (defect {defect:.3e})")]
    NotSymmetric { defect: f64 },

    #[error("matrix is not symplectic (defect {defect:.3e})")]
    NotSymplectic { defect: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error(
        "uncertainty relation violated: smallest eigenvalue of Γ - iΣ is {min_eigenvalue:.3e}"
    )]
    UncertaintyViolated { min_eigenvalue: f64 },

    #[error("local block determinant {det:.3e} is not positive")]
    NonPositiveLocalDeterminant { det: f64 },

    #[error("invariant equations have no real solution (discriminant {discriminant:.3e})")]
    NoRealInvariants { discriminant: f64 },

    #[error("invalid invariant vector: {0}")]
    InvalidInvariants(String),

    #[error("map is not completely positive: smallest eigenvalue {min_eigenvalue:.3e}")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("correlation invariant of the source state vanishes; use the degenerate branch")]
    ZeroCorrelation,

    #[error("local invariant of the untouched mode differs: {source_value} vs {target_value}")]
    MismatchedLocalInvariant {
        source_value: f64,
        target_value: f64,
    },

    #[error("source state has xi3 = 0 (product correlations), outside the degenerate criterion")]
    ProductState,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
