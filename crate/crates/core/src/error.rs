use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong inside the solver.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument is outside its admissible range.
    InvalidParameter { name: &'static str, value: f64 },
    /// Mesh boundaries are not strictly increasing, or too few cells.
    InvalidMesh(&'static str),
    /// A physical point was mapped against a cell that does not contain it.
    OutsideCell { cell: usize, x: f64 },
    /// A reference coordinate lies outside `[-1, 1]`.
    OutsideReference { xi: f64 },
    /// Cell index past the end of the mesh.
    CellIndex { cell: usize, n_cells: usize },
    /// Two operands live on different meshes.
    MeshMismatch,
    /// Two operands have incompatible polynomial degrees.
    DegreeMismatch { expected: usize, found: usize },
    UnknownComponent(String),
    /// The periodic correction system is (numerically) singular:
    /// `|1 - q^N|` fell below the threshold.
    SingularSystem { one_minus_q_pow_n: f64 },
    /// A coefficient became NaN or infinite.
    NonFinite { cell: usize, component: &'static str },
    /// Fixed-point iteration of the midpoint rule did not converge.
    NonConvergence { iterations: usize, last_increment: f64 },
    /// A time step failed inside a longer run.
    StepFailed { step: usize, time: f64, source: Box<Error> },
    /// A study was configured with an unusable grid list.
    InvalidStudy(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value } => {
                write!(f, "parameter `{name}` out of range: {value}")
            }
            Error::InvalidMesh(why) => write!(f, "invalid mesh: {why}"),
            Error::OutsideCell { cell, x } => write!(f, "x = {x} lies outside cell {cell}"),
            Error::OutsideReference { xi } => write!(f, "reference coordinate {xi} outside [-1, 1]"),
            Error::CellIndex { cell, n_cells } => {
                write!(f, "cell index {cell} out of range for {n_cells} cells")
            }
            Error::MeshMismatch => f.write_str("operands are defined on different meshes"),
            Error::DegreeMismatch { expected, found } => {
                write!(f, "polynomial degree mismatch: expected {expected}, found {found}")
            }
            Error::UnknownComponent(name) => write!(f, "unknown field component `{name}`"),
            Error::SingularSystem { one_minus_q_pow_n } => write!(
                f,
                "singular correction system: |1 - q^N| = {one_minus_q_pow_n:e}"
            ),
            Error::NonFinite { cell, component } => {
                write!(f, "non-finite coefficient in component `{component}`, cell {cell}")
            }
            Error::NonConvergence { iterations, last_increment } => write!(
                f,
                "fixed-point iteration did not converge after {iterations} iterations \
                 (last increment {last_increment:e})"
            ),
            Error::StepFailed { step, time, source } => {
                write!(f, "step {step} at t = {time} failed: {source}")
            }
            Error::InvalidStudy(why) => write!(f, "invalid study: {why}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::StepFailed { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
