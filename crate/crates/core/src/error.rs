use alloc::string::String;

use crate::linsolve::SolveReport;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid needs at least 4 cells per axis, got {0}")]
    GridTooSmall(usize),

    #[error("non-finite sample {value} at cell {cell:?} (component {component})")]
    NonFinite {
        cell: [usize; 3],
        component: usize,
        value: f64,
    },

    #[error("fields live on different grids ({left} vs {right} cells per axis)")]
    GridMismatch { left: usize, right: usize },

    #[error("coefficient not positive definite at cell {cell:?}: smallest eigenvalue {lambda_min}")]
    NotPositiveDefinite { cell: [usize; 3], lambda_min: f64 },

    #[error("coefficient not symmetric at cell {cell:?} (asymmetry {asymmetry:e})")]
    NotSymmetric { cell: [usize; 3], asymmetry: f64 },

    #[error("near-singular tensor at cell {cell:?}: |det| = {det:e}")]
    Singular { cell: [usize; 3], det: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{stage} did not converge: relative residual {} after {} iterations", .report.final_relative_residual, .report.iterations)]
    SolverFailed {
        stage: &'static str,
        report: SolveReport,
    },

    #[error("unknown manufactured case `{0}`")]
    UnknownCase(String),

    #[error("sampling plan produced no admissible {0}")]
    EmptySampling(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
