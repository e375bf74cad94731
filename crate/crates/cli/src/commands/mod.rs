pub mod ablate;
pub mod eval;
pub mod lift;
pub mod parse;
pub mod render;
pub mod solve;
pub mod synth;

use std::process::ExitCode;

use serde::Serialize;

/// Usage mistakes exit with 2, data problems with 3, RANSAC failure with 4.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(metricpose::Error),
}

impl From<metricpose::Error> for CliError {
    fn from(e: metricpose::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(metricpose::Error::NoConsensus { .. }) => 4,
            CliError::Data(_) => 3,
        }
    }

    fn to_json(&self) -> String {
        let (error, message) = match self {
            CliError::Usage(m) => ("UsageError", m.trim_end().to_string()),
            CliError::Data(e) => (e.kind(), e.to_string()),
        };
        serde_json::to_string(&ErrorJson { error, message }).expect("plain strings serialize")
    }

    pub fn report(&self) -> ExitCode {
        eprintln!("{}", self.to_json());
        ExitCode::from(self.exit_code())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Machine-readable note on stderr for a recoverable per-item failure.
pub fn warn(context: &str, e: &metricpose::Error) {
    #[derive(Serialize)]
    struct Warning<'a> {
        warning: &'a str,
        context: &'a str,
        message: String,
    }
    let w = Warning { warning: e.kind(), context, message: e.to_string() };
    eprintln!("{}", serde_json::to_string(&w).expect("plain strings serialize"));
}
