use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {site} out of range for {num_qubits} qubits")]
    QubitOutOfRange { site: usize, num_qubits: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("expectation value has imaginary part {imag:.3e}; state or operator is corrupted")]
    ImaginaryExpectation { imag: f64 },

    #[error("bit-flip rate {p_x} outside [0, 1/{num_qubits}]")]
    BitFlipRate { p_x: f64, num_qubits: usize },

    #[error("depolarizing rate {p2} outside [0, 1]")]
    DepolarizingRate { p2: f64 },

    #[error("invalid qubit pair ({0}, {1})")]
    InvalidPair(usize, usize),

    #[error("invalid spin chain: {0}")]
    InvalidChain(String),

    #[error("parameter vector has length {actual}, layout needs {expected}")]
    ParameterCount { expected: usize, actual: usize },

    #[error("overlap requested but no ground truth is attached")]
    MissingGroundTruth,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical assertion failed: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status for the command-line front end: 2 for
    /// configuration problems, 3 for invalid physics parameters, 4 for
    /// failed numerical assertions, 1 for I/O and serialization.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::QubitOutOfRange { .. }
            | Error::DimensionMismatch { .. }
            | Error::BitFlipRate { .. }
            | Error::DepolarizingRate { .. }
            | Error::InvalidPair(..)
            | Error::InvalidChain(_)
            | Error::ParameterCount { .. }
            | Error::MissingGroundTruth => 3,
            Error::NotHermitian { .. }
            | Error::NotUnitary { .. }
            | Error::ImaginaryExpectation { .. }
            | Error::Numerical(_) => 4,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
        }
    }
}
