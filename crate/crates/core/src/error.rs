use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("unknown edge `{0}`")]
    UnknownEdge(String),

    #[error("edge `{0}` is a loop and cannot be contracted")]
    LoopContraction(String),

    #[error("graph is not connected")]
    Disconnected,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid cell: {0}")]
    InvalidCell(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph has no leads")]
    NoLeads,

    #[error("coupling constants must be real for this operation")]
    NonRealCoupling,

    #[error("z = {z} lies within pole tolerance of edge `{edge}`")]
    PoleProximity { z: Complex64, edge: String },

    #[error("singular matrix at z = {z} (condition number {condition:.3e})")]
    SingularMatrix { z: Complex64, condition: f64 },

    #[error(
        "projected and factorised scattering matrices disagree at s = {s} (defect {defect:.3e})"
    )]
    FactorisationMismatch { s: f64, defect: f64 },

    #[error("κ-independent bracket is singular at s = {s}")]
    SingularBracket { s: Complex64 },

    #[error("large-τ extrapolation for path to `{target}` diverged: residual {residual:.3e}, value {value}")]
    ExtrapolationDiverged {
        target: String,
        residual: f64,
        value: Complex64,
    },

    #[error("inconsistent spanning-tree paths: {0}")]
    InconsistentPaths(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PoleProximity { .. }
                | Error::SingularMatrix { .. }
                | Error::FactorisationMismatch { .. }
                | Error::SingularBracket { .. }
                | Error::ExtrapolationDiverged { .. }
        )
    }
}
