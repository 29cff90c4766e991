//! Report envelope and exit codes.

use serde::Serialize;
use serde_json::Value;

pub const TOOL: &str = "addvar";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// How a command ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Negative,
    InputError,
    InternalError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Negative => 1,
            Status::InputError => 2,
            Status::InternalError => 3,
        }
    }
}

/// A failed command: bad input, or a computation that could not finish.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Internal(String),
}

impl Failure {
    pub fn status(&self) -> Status {
        match self {
            Failure::Input(_) => Status::InputError,
            Failure::Internal(_) => Status::InternalError,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Internal(m) => m,
        }
    }
}

pub fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

pub fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(e.to_string())
}

/// What a command produced: a result payload and whether its verdict is
/// positive.
pub struct Outcome {
    pub result: Value,
    pub positive: bool,
}

impl Outcome {
    pub fn new(result: impl Serialize, positive: bool) -> Result<Self, Failure> {
        let result = serde_json::to_value(result).map_err(internal)?;
        Ok(Outcome { result, positive })
    }
}

#[derive(Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

/// The single JSON document every command prints.
#[derive(Serialize)]
pub struct Envelope {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub input: Value,
    pub seed: u64,
    pub status: Status,
    pub exit_code: i32,
    pub timing: Timing,
    pub error: Option<String>,
    pub result: Value,
}
