use thiserror::Error;

use crate::lp::LpError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model spec: {0}")]
    Schema(String),
    #[error("model spec references unknown column {0:?}")]
    UnknownColumn(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("dataset: {0}")]
    Data(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("{direction} bound problem is infeasible even after relaxing by {relaxation}")]
    InfeasibleAfterRelaxation { direction: &'static str, relaxation: f64 },
    #[error("{direction} bound problem is infeasible and relaxation is disabled")]
    Infeasible { direction: &'static str },
    #[error("{direction} bound problem is unbounded; check theta_lower/theta_upper")]
    Unbounded { direction: &'static str },
    #[error("no quantile pair satisfies both coverage constraints ({usable} usable draws, {required} required)")]
    CalibrationInfeasible { usable: usize, required: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for input/validation problems, as opposed to solver or calibration failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Schema(_)
                | Error::UnknownColumn(_)
                | Error::Dimension(_)
                | Error::Data(_)
                | Error::InvalidArgument(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
