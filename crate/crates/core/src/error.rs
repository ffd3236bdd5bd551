use thiserror::Error;

use crate::model::ScenarioCase;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("operation requires {expected} but the configuration is {found}")]
    WrongCase {
        expected: &'static str,
        found: String,
    },

    #[error("parameters outside every gap regime: {0}")]
    OutsideRegime(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("unknown {kind} '{name}' (available: {available})")]
    UnknownName {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }

    pub(crate) fn wrong_case(expected: &'static str, found: Option<ScenarioCase>) -> Self {
        Error::WrongCase {
            expected,
            found: match found {
                Some(case) => case.to_string(),
                None => "a general-gain configuration".to_string(),
            },
        }
    }
}
