use std::io;
use std::path::PathBuf;

use thiserror::Error;
use wavedep::WaveError;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config file entries or option values.
    #[error("{message}")]
    Config { kind: &'static str, message: String },
    #[error(transparent)]
    Analysis(#[from] WaveError),
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn config(kind: &'static str, message: impl Into<String>) -> Self {
        CliError::Config {
            kind,
            message: message.into(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { kind, .. } => kind,
            CliError::Analysis(e) => e.kind(),
            CliError::Output { .. } => "output",
        }
    }

    /// 2 for anything the user can fix by changing options, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Analysis(
                WaveError::InvalidParameter { .. } | WaveError::UnknownFilter(_) | WaveError::LevelTooLarge { .. },
            ) => 2,
            _ => 1,
        }
    }

    /// Single stderr line: `error: kind=<kind> message="<text>"`.
    pub fn line(&self) -> String {
        format_error_line(self.kind(), &self.to_string())
    }
}

pub fn format_error_line(kind: &str, message: &str) -> String {
    let mut escaped = String::with_capacity(message.len());
    for c in message.chars() {
        match c {
            '"' => escaped.push_str("\\\""),
            '\\' => escaped.push_str("\\\\"),
            '\n' | '\r' | '\t' => escaped.push(' '),
            c => escaped.push(c),
        }
    }
    format!("error: kind={kind} message=\"{}\"", escaped.trim())
}
