use thiserror::Error;

/// Errors produced anywhere in the estimation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("need ≥ 2 observations")]
    TooFewObservations,

    #[error("gamma out of range: {kind} requires gamma > {bound}, got {gamma}")]
    GammaOutOfRange {
        kind: &'static str,
        bound: f64,
        gamma: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("prox not unique; increase r ({kind}: r = {r}, gamma = {gamma})")]
    ProxNotUnique {
        kind: &'static str,
        r: f64,
        gamma: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("divergence detected at iteration {iter}: {detail}")]
    Divergence { iter: usize, detail: String },

    #[error("ASW undefined for k=1")]
    SilhouetteSingleCluster,

    #[error("structure unidentifiable: {0}")]
    Unidentifiable(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("fit failed at grid point (λ1 = {lambda1:e}, λ2 = {lambda2:e}): {source}")]
    GridPoint {
        lambda1: f64,
        lambda2: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the failure is numerical (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Divergence { .. } | Error::Unidentifiable(_) | Error::ProxNotUnique { .. } => {
                true
            }
            Error::GridPoint { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
