use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitIndex { index: usize, num_qubits: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("corrupted state: {0}")]
    CorruptedState(String),

    #[error("value out of range for `{field}`: {message}")]
    Range { field: String, message: String },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("length mismatch: {0}")]
    Length(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("window overflow: {0}")]
    Window(String),

    #[error("undefined normalization: {0}")]
    UndefinedNormalization(String),

    #[error("NARMA recurrence diverged at t={t}: |y|={value:e}")]
    Divergence { t: usize, value: f64 },

    #[error("classification error: {0}")]
    Classification(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn range(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Range {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Wraps the error with a description of where it happened.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Capacity(_) => "capacity",
            Error::QubitIndex { .. } => "qubit-index",
            Error::Dimension(_) => "dimension",
            Error::InvalidChannel(_) => "invalid-channel",
            Error::InvalidGate(_) => "invalid-gate",
            Error::InvalidState(_) => "invalid-state",
            Error::CorruptedState(_) => "corrupted-state",
            Error::Range { .. } => "range",
            Error::InvalidLayout(_) => "invalid-layout",
            Error::InvalidTopology(_) => "invalid-topology",
            Error::Parse(_) => "parse",
            Error::Config(_) => "config",
            Error::Length(_) => "length",
            Error::NonFinite(_) => "non-finite",
            Error::Window(_) => "window",
            Error::UndefinedNormalization(_) => "undefined-normalization",
            Error::Divergence { .. } => "divergence",
            Error::Classification(_) => "classification",
            Error::Context { source, .. } => source.kind(),
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
