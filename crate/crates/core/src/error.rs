use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not Hermitian (max |M - M†| = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("{what} = {requested} exceeds the cap of {limit}")]
    CapExceeded {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("unresolved reference `{0}`")]
    UnresolvedRef(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Self::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidParameter(msg.into())
    }

    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        Self::Schema(msg.into())
    }

    pub(crate) fn cap(what: &'static str, requested: impl Into<u128>, limit: impl Into<u128>) -> Self {
        Self::CapExceeded {
            what,
            requested: requested.into(),
            limit: limit.into(),
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 3 for resource-cap refusals, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::CapExceeded { .. } => 3,
            _ => 2,
        }
    }
}
