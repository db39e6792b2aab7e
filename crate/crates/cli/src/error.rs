use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error{}{}: {message}",
        key.as_ref().map(|k| format!(" at `{k}`")).unwrap_or_default(),
        line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        key: Option<String>,
        line: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Run(#[from] sgn_core::Error),

    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut value = json!({
            "status": "error",
            "message": self.to_string(),
        });
        let obj = value.as_object_mut().expect("object literal");
        match self {
            CliError::Config { key, line, .. } => {
                obj.insert("kind".into(), json!("config"));
                obj.insert("key".into(), json!(key));
                obj.insert("line".into(), json!(line));
            }
            CliError::Run(e) => {
                obj.insert("kind".into(), json!(e.kind()));
                if let sgn_core::Error::StepFailed { step, t, source } = e {
                    obj.insert("step".into(), json!(step));
                    obj.insert("t".into(), json!(t));
                    obj.insert("cause".into(), json!(source.kind()));
                }
            }
            CliError::Io { path, .. } => {
                obj.insert("kind".into(), json!("io"));
                obj.insert("path".into(), json!(path));
            }
        }
        value
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}
