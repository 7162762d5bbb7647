use thiserror::Error;

use crate::machine::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("{what} = {value} is outside [0, 1]")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("input symbol `{symbol}` at position {position} is not in the input alphabet")]
    InputSymbol { symbol: String, position: usize },

    #[error("active transition set is empty")]
    EmptyActiveSet,

    #[error("machine is invalid ({} violation(s)): {}", .0.len(), first_message(.0))]
    InvalidMachine(Vec<Violation>),

    #[error("invalid strategy `{0}`")]
    Strategy(String),

    #[error("{0}")]
    Config(String),
}

fn first_message(violations: &[Violation]) -> &str {
    violations.first().map(|v| v.message.as_str()).unwrap_or("")
}
