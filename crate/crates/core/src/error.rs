use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("node {node} out of range for {num_nodes} nodes")]
    NodeOutOfRange { node: u64, num_nodes: u32 },

    #[error("self-loop on node {0}")]
    SelfLoop(u32),

    #[error("invalid probability {name} = {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid task spec: {0}")]
    InvalidSpec(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("snapshot at timestep {t} has {found} nodes, expected {expected}")]
    NodeCountMismatch { t: usize, expected: u32, found: u32 },

    #[error("dynamic graph needs at least one snapshot")]
    EmptyGraph,

    #[error("timestep {got} observed after {last}; snapshots must arrive in order")]
    OutOfOrder { last: usize, got: usize },

    #[error("predictor has not observed any snapshot yet")]
    NoObservation,

    #[error("cannot aggregate: {0}")]
    Aggregate(String),

    #[error("schema error in {path}: {msg}")]
    Schema { path: PathBuf, msg: String },

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("statistics mismatch for {field}: manifest says {expected}, data has {found}")]
    StatsMismatch {
        field: &'static str,
        expected: String,
        found: String,
    },

    #[error("predictions: {0}")]
    Predictions(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("JSON error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
