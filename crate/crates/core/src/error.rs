use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Operands act on registers of different width.
    QubitMismatch {
        left: usize,
        right: usize,
    },
    IndexOutOfRange {
        index: usize,
        bound: usize,
    },
    InvalidArgument(&'static str),
    NotHermitian,
    /// Rotation generators must carry coefficient exactly 1.
    NonUnitCoefficient,
    /// Taylor series for the propagator did not settle within the term cap.
    SeriesNotConverged {
        terms: usize,
    },
    DenseLimit {
        n_qubits: usize,
        limit: usize,
    },
    /// First-order norm estimate `1 - 2 dbeta <H>` is not positive.
    NonPositiveNorm {
        value: f64,
    },
    /// Truncated model-space overlap lost positive definiteness.
    NotPositiveDefinite {
        min_eigenvalue: f64,
    },
    SingularOverlap {
        min_eigenvalue: f64,
    },
    MissingMidpoint {
        ell: usize,
    },
    EmptyPool,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::QubitMismatch { left, right } => {
                write!(f, "qubit count mismatch: {left} vs {right}")
            }
            Error::IndexOutOfRange { index, bound } => {
                write!(f, "index {index} out of range (bound {bound})")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NotHermitian => f.write_str("operator is not Hermitian"),
            Error::NonUnitCoefficient => f.write_str("rotation generator must have unit coefficient"),
            Error::SeriesNotConverged { terms } => {
                write!(f, "propagator series not converged after {terms} terms; reduce the time step")
            }
            Error::DenseLimit { n_qubits, limit } => {
                write!(f, "{n_qubits} qubits exceeds the dense limit of {limit}")
            }
            Error::NonPositiveNorm { value } => {
                write!(f, "first-order norm estimate {value} is not positive; reduce the time step")
            }
            Error::NotPositiveDefinite { min_eigenvalue } => write!(
                f,
                "propagated overlap not positive definite (min eigenvalue {min_eigenvalue:e}); reduce the time step"
            ),
            Error::SingularOverlap { min_eigenvalue } => {
                write!(f, "overlap matrix singular (min eigenvalue {min_eigenvalue:e})")
            }
            Error::MissingMidpoint { ell } => write!(f, "no Krylov record for midpoint step {ell}"),
            Error::EmptyPool => f.write_str("operator pool is empty"),
        }
    }
}

impl core::error::Error for Error {}
