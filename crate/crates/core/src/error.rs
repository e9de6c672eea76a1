use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (relative deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("form is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("divergent integrand: gauge vanishes or is non-finite on the unit sphere ({context})")]
    Divergent { context: String },

    #[error("ill-conditioned dual moment matrix (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("{what} did not converge after {iterations} iterations (best {best:.6e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        best: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("point lies outside the domain: {0}")]
    OutsideDomain(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps the error with the name of the pipeline stage that produced it.
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True when the error (or its innermost cause) is a specification or
    /// support problem rather than a numerical failure.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::Stage { source, .. } => source.is_config_error(),
            Error::DimensionMismatch { .. }
            | Error::Unsupported(_)
            | Error::InvalidSpec(_)
            | Error::OutsideDomain(_) => true,
            _ => false,
        }
    }

    /// Name of the outermost stage tag, if any.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
