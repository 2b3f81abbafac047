use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value {0}")]
    NonFinite(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("fibre inverse did not converge at theta={theta}, y={y}")]
    InverseNotConverged { theta: f64, y: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("fibre image wraps the whole circle")]
    FibreWrap,

    /// The family does not have the geometry a construction needs
    /// (wrong number of critical components, non-monotone fibre, ...).
    #[error("family structure: {0}")]
    Structure(String),

    #[error("plateau bracket invalid: {0}")]
    FalsePlateau(String),

    #[error("edge refinement disabled: {0}")]
    RefinementDisabled(String),

    #[error("not converged: {0}")]
    NotConverged(String),
}
