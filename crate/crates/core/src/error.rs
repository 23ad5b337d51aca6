use std::fmt;

use thiserror::Error;

/// A validation problem found while loading a market or agent-target file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based source line, when the problem comes from a file.
    pub line: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }

    pub fn at(line: usize, message: impl Into<String>) -> Self {
        Self::new(Some(line), message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),

    #[error("size cap exceeded: {what} is {size}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("set {set} is not a subset of the contracts of agent {agent}")]
    NotAgentPortfolio { agent: String, set: String },

    #[error("outcome {0} is not individually rational")]
    NotIndividuallyRational(String),

    #[error("pool {0} is not contained in any individually rational outcome")]
    PoolNotExtendable(String),

    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),

    #[error("{0}")]
    Parse(String),

    #[error("sampling gave up: no ranking for {agent} satisfying {condition}, {attempts} draws in total")]
    SamplingExhausted {
        agent: String,
        condition: &'static str,
        attempts: usize,
    },
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
