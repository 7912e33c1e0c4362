use std::path::PathBuf;

use aro_core::ErrorKind;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] aro_core::Error),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid CSV in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for infeasibility verdicts, 2 for bad input, 3 for solver failures.
    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            ErrorKind::Infeasible => 1,
            ErrorKind::Input => 2,
            ErrorKind::Solver => 3,
        }
    }

    fn kind(&self) -> ErrorKind {
        match self {
            CliError::Core(e) => e.kind(),
            _ => ErrorKind::Input,
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.tag(),
            CliError::Io { .. } => "io",
            CliError::Json { .. } => "json",
            CliError::Csv { .. } => "csv",
            CliError::Input(_) => "input",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self.kind() {
            ErrorKind::Infeasible => "infeasible",
            ErrorKind::Input => "input",
            ErrorKind::Solver => "solver",
        };
        json!({
            "error": self.tag(),
            "kind": kind,
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        let infeasible = CliError::from(aro_core::Error::NominallyInfeasible);
        let solver = CliError::from(aro_core::Error::NumericalFailure("stalled".into()));
        let input = CliError::Input("bad".into());
        assert_eq!(infeasible.exit_code(), 1);
        assert_eq!(input.exit_code(), 2);
        assert_eq!(solver.exit_code(), 3);
        assert_eq!(solver.to_json()["kind"], "solver");
        assert_eq!(input.to_json()["error"], "input");
    }
}
