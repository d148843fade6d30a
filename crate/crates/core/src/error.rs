use core::fmt;

/// Rejected configuration value.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// A numeric field lies outside its admissible range.
    OutOfRange {
        field: &'static str,
        value: f64,
        expected: &'static str,
    },
    /// A length or count field is zero or otherwise unusable.
    InvalidLength {
        field: &'static str,
        value: usize,
        expected: &'static str,
    },
    /// A collection that must hold at least one item is empty.
    Empty { field: &'static str },
    /// Two vectors that must agree in length do not.
    LengthMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    /// A non-finite value appeared where finite data is required.
    NonFinite { field: &'static str },
    /// An algorithm name that is not recognised.
    UnknownAlgorithm,
}

impl ConfigError {
    /// Name of the configuration field the error refers to, if any.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            ConfigError::OutOfRange { field, .. }
            | ConfigError::InvalidLength { field, .. }
            | ConfigError::Empty { field }
            | ConfigError::LengthMismatch { field, .. }
            | ConfigError::NonFinite { field } => Some(field),
            ConfigError::UnknownAlgorithm => Some("algorithm"),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::OutOfRange {
                field,
                value,
                expected,
            } => write!(f, "`{field}` = {value} is out of range (expected {expected})"),
            ConfigError::InvalidLength {
                field,
                value,
                expected,
            } => write!(f, "`{field}` = {value} is invalid (expected {expected})"),
            ConfigError::Empty { field } => write!(f, "`{field}` must not be empty"),
            ConfigError::LengthMismatch {
                field,
                expected,
                found,
            } => write!(f, "`{field}` has length {found}, expected {expected}"),
            ConfigError::NonFinite { field } => write!(f, "`{field}` contains non-finite values"),
            ConfigError::UnknownAlgorithm => write!(
                f,
                "unknown algorithm (expected one of fxlmp, fxrls, fxlogrls, fxrlp, fxlogrlp, off)"
            ),
        }
    }
}

impl core::error::Error for ConfigError {}
