use std::fmt;

use thiserror::Error;

/// Which interval family a degenerate solution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Col,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Row => write!(f, "row"),
            Axis::Col => write!(f, "col"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The KKT system could not be solved to the required residuals.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// The minimizer contains a non-positive grid interval; the mapping
    /// would fold. Callers may retry with a smaller zoom factor.
    #[error("degenerate deformation: {axis} interval {index} is {value}")]
    DegenerateDeformation {
        axis: Axis,
        index: usize,
        value: f64,
    },

    #[error("point ({x}, {y}) outside map domain [0, {max_x}] x [0, {max_y}]")]
    OutOfDomain {
        x: f64,
        y: f64,
        max_x: f64,
        max_y: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
