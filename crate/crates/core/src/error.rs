use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("numtheory: modulus {modulus} is invalid: {reason}")]
    InvalidModulus { modulus: String, reason: &'static str },

    #[error("numtheory: {0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("gauss: modulus {0} is not square-free")]
    NotSquareFree(u64),

    #[error("gauss: {a} is not coprime to {modulus}")]
    NotCoprime { a: u64, modulus: u64 },

    #[error("{context}: {divisor} does not divide {value}")]
    NotDivisor {
        context: &'static str,
        divisor: u64,
        value: u64,
    },

    #[error("{context}: {detail}")]
    OutOfRange {
        context: &'static str,
        detail: String,
    },

    #[error("qsim: {0}")]
    Simulation(String),

    #[error("reversible: {0}")]
    Circuit(String),

    #[error("reversible: netlist line {line}: {detail}")]
    Netlist { line: usize, detail: String },

    #[error("driver: {0}")]
    Driver(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub(crate) fn out_of_range(context: &'static str, detail: impl Into<String>) -> Error {
    Error::OutOfRange {
        context,
        detail: detail.into(),
    }
}
