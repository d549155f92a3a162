use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate lattice basis: |a1 x a2| = {0:e}")]
    DegenerateBasis(f64),

    #[error("grid must have at least one point per direction")]
    EmptyGrid,

    #[error("direction vector must be nonzero and finite")]
    ZeroDirection,

    #[error("({0}, {1}) is not a reciprocal lattice vector")]
    NotReciprocal(f64, f64),

    #[error("model has no lattice periodicity")]
    NotPeriodic,

    #[error("hopping list is not Hermitian: {0}")]
    NonHermitianHoppings(String),

    #[error("matrix is not Hermitian (defect {defect:e}, scale {scale:e})")]
    NonHermitian { defect: f64, scale: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("gap closes at k = ({}, {}): gap {gap:e}", k[0], k[1])]
    GapClosure { k: [f64; 2], gap: f64 },

    #[error("Fermi level {mu} lies on an eigenvalue at k = ({}, {})", k[0], k[1])]
    FermiOnEigenvalue { k: [f64; 2], mu: f64 },

    #[error("band condition violated: {0}")]
    BandCondition(String),

    #[error("unitarity defect {defect:e} at k = ({}, {}), t = {t}", k[0], k[1])]
    UnitarityBreach { k: [f64; 2], t: f64, defect: f64 },

    #[error("inconsistent results: {0}")]
    Inconsistent(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("config field `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable tag for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateBasis(_) => "degenerate-basis",
            Error::EmptyGrid => "empty-grid",
            Error::ZeroDirection => "zero-direction",
            Error::NotReciprocal(..) => "not-reciprocal",
            Error::NotPeriodic => "not-periodic",
            Error::NonHermitianHoppings(_) => "non-hermitian-hoppings",
            Error::NonHermitian { .. } => "non-hermitian",
            Error::Shape(_) => "shape",
            Error::GapClosure { .. } => "gap-closure",
            Error::FermiOnEigenvalue { .. } => "fermi-on-eigenvalue",
            Error::BandCondition(_) => "band-condition",
            Error::UnitarityBreach { .. } => "unitarity",
            Error::Inconsistent(_) => "inconsistent",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Parse { .. } => "parse",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }
}
