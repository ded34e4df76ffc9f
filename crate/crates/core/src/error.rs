use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {0} outside supported range 1..={max}", max = crate::qstate::MAX_QUBITS)]
    QubitCount(usize),

    #[error("qubit index {index} out of range for {num_qubits}-qubit state")]
    QubitIndex { index: usize, num_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("gate {kind} requires an angle")]
    MissingAngle { kind: &'static str },

    #[error("gate {kind} takes no angle")]
    SuperfluousAngle { kind: &'static str },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid template: {0}")]
    InvalidTemplate(String),

    #[error("unknown template `{name}` (valid: {valid})")]
    UnknownTemplate { name: String, valid: String },

    #[error("embedding input {index} = {value} is outside (-1, 1); was tanh applied upstream?")]
    EmbeddingRange { index: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },

    #[error("labels must be 0 or 1, found {0}")]
    NonBinaryLabel(u8),

    #[error("empty input")]
    EmptyInput,

    #[error("no samples of class {0} present")]
    MissingClass(u8),

    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },

    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error("model shape inconsistency: {0}")]
    ModelShape(String),

    #[error("config error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("data error: {0}")]
    Data(String),

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
