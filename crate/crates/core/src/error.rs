//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates a documented model invariant.
    InvalidParams(String),
    /// An input lies outside the operation's domain.
    Domain(String),
    /// A subsystem, dimension or register shape does not match.
    Layout(String),
    /// The requested Hilbert-space size exceeds the configured cap.
    Resource { requested: usize, cap: usize },
    /// A supplied matrix fails the unitarity check.
    NonUnitary { deviation: f64, tol: f64 },
    /// The payoff scaling denominator `s_last − strike` is not positive.
    DegenerateStrike { strike: f64, s_last: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Layout(msg) => write!(f, "layout error: {msg}"),
            Error::Resource { requested, cap } => {
                write!(f, "resource error: dimension {requested} exceeds cap {cap}")
            }
            Error::NonUnitary { deviation, tol } => {
                write!(f, "matrix is not unitary: max deviation {deviation:e} > {tol:e}")
            }
            Error::DegenerateStrike { strike, s_last } => write!(
                f,
                "strike {strike} is not below the last grid point {s_last}; payoff scaling degenerates"
            ),
        }
    }
}

impl std::error::Error for Error {}
