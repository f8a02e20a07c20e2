use thiserror::Error;

use crate::units::Unit;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its constraint. `key` is the configuration name.
    #[error("{key} must be {constraint}")]
    InvalidParam {
        key: &'static str,
        constraint: String,
    },

    #[error("unsupported unit conversion: {from} -> {to}")]
    UnsupportedUnits { from: Unit, to: Unit },

    #[error("non-finite value in {what} at t = {t} a.u. (last valid time {last_valid_t} a.u.)")]
    NonFinite {
        what: &'static str,
        t: f64,
        last_valid_t: f64,
    },

    #[error("unphysical parameter regime: {0}")]
    Unphysical(String),

    #[error("no polariton beating detected")]
    NoBeating,

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}

impl Error {
    pub(crate) fn invalid(key: &'static str, constraint: impl Into<String>) -> Self {
        Error::InvalidParam {
            key,
            constraint: constraint.into(),
        }
    }
}
