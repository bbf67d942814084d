//! Error type shared by all modules.

use alloc::string::String;

/// Errors produced by library operations.
///
/// The variants mirror the failure classes surfaced by the CLI: bad numeric
/// arguments, violated operation preconditions, witnesses of the wrong shape,
/// invalid models, and quotient constructions that turn out ill-defined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A numeric argument is outside the operation's domain.
    Domain(String),
    /// A structural precondition is violated (e.g. a relation that is not a
    /// bisimulation was passed where one is required).
    Precondition(String),
    /// The operation needs a different witness representation.
    UnsupportedWitness(String),
    /// A model or matrix failed validation.
    Validation(String),
    /// A quotient construction is ill-defined (obs or kernel disagreement
    /// inside an equivalence class).
    Construction(String),
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::UnsupportedWitness(m) => write!(f, "unsupported witness: {m}"),
            Error::Validation(m) => write!(f, "validation error: {m}"),
            Error::Construction(m) => write!(f, "construction error: {m}"),
        }
    }
}

impl core::error::Error for Error {}

/// Shorthand constructors used throughout the crate.
impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::UnsupportedWitness(msg.into())
    }
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
    pub fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }
}
