use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("factorization incomplete: cofactor {cofactor} has no factor below {bound} and is not prime")]
    FactorizationIncomplete { cofactor: String, bound: u64 },
    #[error("singular curve: discriminant is zero")]
    SingularCurve,
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("point lies outside the lattice spanned by the basis and torsion")]
    OutsideLattice,
    #[error("map is indeterminate at {0}")]
    Indeterminate(String),
    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),
    #[error("degree estimate unstable: {0}")]
    DegreeUnstable(String),
    #[error("insufficient height range: {0}")]
    InsufficientHeightRange(String),
    #[error("resource budget exceeded ({what}); certified to {partial_digits} digits")]
    Resource { what: String, partial_digits: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
