use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("resource id `{0}` is already registered")]
    DuplicateId(String),

    #[error("agency must be given for agents and only for agents (resource `{0}`)")]
    AgencyMismatch(String),

    #[error("unknown resource `{0}`")]
    UnknownResource(String),

    #[error("a viewpoint cannot link `{0}` to itself")]
    SelfLoop(String),

    #[error("`{0}` is not an agent and cannot emit viewpoints")]
    NonAgentEmitter(String),

    #[error("`{resource}` is a {actual}, expected a {expected}")]
    KindMismatch {
        resource: String,
        expected: &'static str,
        actual: &'static str,
    },

    #[error("timestamp {at} precedes the last timestamp {last} emitted by `{emitter}`")]
    TimeRegression { emitter: String, at: u64, last: u64 },

    #[error("evaluation time {now} precedes viewpoint time {at}")]
    TimeTravel { now: u64, at: u64 },

    #[error("beam mixes viewpoints of different resource pairs")]
    MixedBeam,

    #[error("source and target are the same resource `{0}`")]
    SameResource(String),

    #[error("invalid perspective: {0}")]
    InvalidPerspective(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed script at step {step}, action {action}: {reason}")]
    MalformedScript {
        step: usize,
        action: usize,
        reason: String,
    },

    #[error("event sequence gap: expected seq {expected}, found {found}")]
    SequenceGap { expected: u64, found: u64 },

    #[error("corrupt event log line {line}: {reason}")]
    CorruptLine { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable variant name, used in wire-level error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DuplicateId(_) => "DuplicateId",
            Error::AgencyMismatch(_) => "AgencyMismatch",
            Error::UnknownResource(_) => "UnknownResource",
            Error::SelfLoop(_) => "SelfLoop",
            Error::NonAgentEmitter(_) => "NonAgentEmitter",
            Error::KindMismatch { .. } => "KindMismatch",
            Error::TimeRegression { .. } => "TimeRegression",
            Error::TimeTravel { .. } => "TimeTravel",
            Error::MixedBeam => "MixedBeam",
            Error::SameResource(_) => "SameResource",
            Error::InvalidPerspective(_) => "InvalidPerspective",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::MalformedScript { .. } => "MalformedScript",
            Error::SequenceGap { .. } => "SequenceGap",
            Error::CorruptLine { .. } => "CorruptLine",
            Error::Io(_) => "IoFailure",
        }
    }
}
