use thiserror::Error;

/// Failures surfaced by the command line, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config key `{key}`: {message}")]
    Schema { key: String, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] hvrt_core::Error),
}

impl CliError {
    pub fn schema(key: &str, message: &str) -> Self {
        CliError::Schema {
            key: key.to_string(),
            message: message.to_string(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "ParseError",
            CliError::Schema { .. } => "SchemaError",
            CliError::Usage(_) => "UsageError",
            CliError::Io { .. } => "IoError",
            CliError::Core(e) => e.kind(),
        }
    }

    /// 2 for bad input, 3 for numerical or feasibility failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.kind() {
                "InvalidParam" | "InvalidThresholds" | "UnknownEvent" | "OutsideWindRange" => 2,
                _ => 3,
            },
            _ => 2,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
        });
        match self {
            CliError::Parse { line, .. } => v["line"] = (*line).into(),
            CliError::Schema { key, .. } => v["key"] = key.clone().into(),
            _ => {}
        }
        v
    }
}
