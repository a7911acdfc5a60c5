use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: {message}")]
    Parse { context: String, message: String },
    #[error("unsupported {format} feature: {feature}")]
    Unsupported {
        format: &'static str,
        feature: String,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),
    #[error("singular basis")]
    SingularBasis,
    #[error("numerical failure in simplex: {0}")]
    Numerical(String),
    #[error("LP relaxation is infeasible")]
    Infeasible,
    #[error("LP relaxation is unbounded")]
    Unbounded,
    #[error("disjunction proves infeasibility: every term is empty")]
    AllTermsInfeasible,
    #[error("reparameterization undefined on empty term {0}")]
    EmptyTerm(usize),
    #[error("certificate does not match: {0}")]
    CertificateMismatch(String),
    #[error("degenerate cut: all coefficients vanish")]
    DegenerateCut,
    #[error("strong PDI precondition failed: {0}; fall back to fresh generation")]
    NoSurvivingTerm(String),
    #[error("term {term}: {source}")]
    Term {
        term: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid cut detected: {0}")]
    InvalidCut(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
