//! Error type shared across model construction, synthesis and simulation.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("initial value {value} for `{name}` outside domain {lo}..={hi}")]
    InitialOutOfDomain {
        name: String,
        value: i32,
        lo: i32,
        hi: i32,
    },

    #[error("variable id {0} is not declared in the table")]
    UndeclaredVariable(usize),

    #[error("composed automata must share one variable table")]
    MixedVariableTables,

    #[error(
        "write conflict on `{event}`: variable `{variable}` assigned by more than one component"
    )]
    WriteConflict { event: String, variable: String },

    #[error("nondeterministic model: distinct successors on `{event}` from the same state")]
    Nondeterministic { event: String },

    #[error("state cap of {cap} states exceeded")]
    StateCap { cap: usize },

    #[error("synthesis did not converge within {0} passes")]
    SynthesisDiverged(u64),

    #[error("target structure unreachable under the placement rules")]
    UnreachableTarget,

    #[error("no supervisor exists for this structure")]
    NoSupervisor,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("script error at step {step}: event `{event}` not enabled")]
    Script { step: u64, event: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
