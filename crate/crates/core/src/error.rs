use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("OFF parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid parameters: {msg}")]
    InvalidParams { module: &'static str, msg: String },

    #[error("degree mismatch: {msg}")]
    Degree { module: &'static str, msg: String },

    #[error("no spectral gap: last kept singular value {kept:e}, first discarded {dropped:e}")]
    SpectralGap {
        module: &'static str,
        kept: f64,
        dropped: f64,
    },

    #[error("solver failure: {msg}")]
    Solver { module: &'static str, msg: String },

    #[error("ill-conditioned sum of subspaces (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("basis is not mass-orthonormal (deviation {deviation:e})")]
    NonOrthonormal { deviation: f64 },

    #[error("integrator failed near t = {t}: {msg}")]
    Integrator { t: f64, msg: String },

    #[error("quadrature did not converge (last change {change:e})")]
    Quadrature { change: f64 },

    #[error("1 - cos(theta) underflows at r = {r:e}")]
    Underflow { r: f64 },

    #[error("boundary form is not in the image of the DtN map (residual {residual:e})")]
    NotInImage { residual: f64 },
}

impl Error {
    pub(crate) fn params(module: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidParams {
            module,
            msg: msg.into(),
        }
    }

    pub(crate) fn degree(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Degree {
            module,
            msg: msg.into(),
        }
    }

    pub(crate) fn solver(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Solver {
            module,
            msg: msg.into(),
        }
    }

    /// Module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Parse { .. } | Error::InvalidMesh(_) => "mesh",
            Error::InvalidParams { module, .. }
            | Error::Degree { module, .. }
            | Error::SpectralGap { module, .. }
            | Error::Solver { module, .. } => module,
            Error::IllConditioned { .. } | Error::NonOrthonormal { .. } => "hodge",
            Error::Integrator { .. } | Error::Quadrature { .. } | Error::Underflow { .. } => "cohom1",
            Error::NotInImage { .. } => "dtn",
        }
    }

    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::InvalidMesh(_) => "validation",
            Error::InvalidParams { .. } => "params",
            Error::Degree { .. } => "degree",
            Error::SpectralGap { .. } => "spectral-gap",
            Error::Solver { .. } => "solver",
            Error::IllConditioned { .. } => "ill-conditioned",
            Error::NonOrthonormal { .. } => "non-orthonormal",
            Error::Integrator { .. } => "integrator",
            Error::Quadrature { .. } => "quadrature",
            Error::Underflow { .. } => "underflow",
            Error::NotInImage { .. } => "not-in-image",
        }
    }

    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::InvalidMesh(_)
                | Error::InvalidParams { .. }
                | Error::Degree { .. }
                | Error::Underflow { .. }
        )
    }
}
