//! Error type shared across the toolkit.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A pipeline stage failed; wraps the underlying error with the stage name.
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: Box<csv::Error>,
    },

    /// Row-level parse failure. `row` is the 1-based line number in the file.
    #[error("{path}:{row}: {message}")]
    Parse {
        path: String,
        row: u64,
        message: String,
    },

    #[error("{path}:{row}: duplicate key {key}")]
    DuplicateKey {
        path: String,
        row: u64,
        key: String,
    },

    #[error("requested variable {0} not present in the data")]
    MissingVariable(String),

    #[error("empty panel: {0}")]
    EmptyPanel(String),

    #[error("invalid config: {0}")]
    Config(String),

    /// Shape or variable-list mismatch between model parts and panels.
    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("insufficient data for {what}: need {needed}, got {got}")]
    Insufficient {
        what: String,
        needed: usize,
        got: usize,
    },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("bundle: {0}")]
    Bundle(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn with_stage(self, stage: &str) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }

    /// Process exit code contract: 1 for data or config errors, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::NotPositiveDefinite(_) | Error::Numerical(_) => 2,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_contract() {
        assert_eq!(Error::Config("x".into()).exit_code(), 1);
        assert_eq!(Error::EmptyPanel("x".into()).exit_code(), 1);
        assert_eq!(Error::Numerical("x".into()).exit_code(), 2);
        assert_eq!(
            Error::NotPositiveDefinite("x".into())
                .with_stage("glasso")
                .exit_code(),
            2
        );
    }

    #[test]
    fn stage_prefixes_message() {
        let e = Error::Degenerate("zero variance".into()).with_stage("tails");
        assert_eq!(e.to_string(), "tails: degenerate sample: zero variance");
    }
}
