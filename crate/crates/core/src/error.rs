use thiserror::Error;

/// Errors raised by lattice construction, state preparation and propagation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("realization has no occupied sites")]
    EmptyOccupancy,

    #[error("state basis does not match the Hamiltonian basis")]
    BasisMismatch,

    #[error("coupling requested for a zero displacement")]
    ZeroDisplacement,

    #[error("state has zero norm on the occupied sites")]
    ZeroNorm,

    #[error("Bessel focus state loses tail mass {tail:.3e} outside the lattice (limit {limit:.1e})")]
    BesselTail { tail: f64, limit: f64 },

    #[error("target site {0:?} is vacant")]
    VacantTarget([usize; 2]),

    #[error("coordinate {0:?} lies outside the lattice")]
    OutOfBounds([usize; 2]),

    #[error("unknown level label `{0}`")]
    UnknownLevel(String),

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
