use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} must lie in [0, 1], got {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("step constant must be greater than zero, got {0}")]
    NonPositiveIncrement(f64),

    #[error("polarizer angle must lie in [0, 90] degrees, got {0}")]
    AngleOutOfRange(f64),

    #[error("user count must be at least {min}, got {got}")]
    InvalidUserCount { min: usize, got: usize },

    #[error("expected {expected} {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{n} users need ceil({n}/2) = {expected} constants, got {got}")]
    ConstantCount {
        n: usize,
        expected: usize,
        got: usize,
    },

    #[error("constants must be strictly decreasing and positive: {0:?}")]
    ConstantsNotDecreasing(Vec<f64>),

    #[error("sequence too short: {len} bits, at least {min} required")]
    SequenceTooShort { len: usize, min: usize },

    #[error("reachable state set exceeds the bound of {bound} states")]
    GridTooLarge { bound: usize },

    #[error("step constant {c} is too small to resolve on the probability lattice (tolerance {tolerance})")]
    LatticeUnresolvable { c: f64, tolerance: f64 },

    #[error("{0}")]
    EmptyInput(&'static str),

    #[error("invalid config field `{field}`: {message}")]
    InvalidConfig {
        field: &'static str,
        message: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: &'static str, message: impl Into<String>) -> Self {
        Self::InvalidConfig {
            field,
            message: message.into(),
        }
    }

    /// Short stable identifier, used for machine-parseable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidProbability { .. } => "invalid_probability",
            Error::NonPositiveIncrement(_) => "non_positive_increment",
            Error::AngleOutOfRange(_) => "angle_out_of_range",
            Error::InvalidUserCount { .. } => "invalid_user_count",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::ConstantCount { .. } => "constant_count",
            Error::ConstantsNotDecreasing(_) => "constants_not_decreasing",
            Error::SequenceTooShort { .. } => "sequence_too_short",
            Error::GridTooLarge { .. } => "grid_too_large",
            Error::LatticeUnresolvable { .. } => "lattice_unresolvable",
            Error::EmptyInput(_) => "empty_input",
            Error::InvalidConfig { .. } => "invalid_config",
            Error::Usage(_) => "usage",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}
