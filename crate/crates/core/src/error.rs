// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced anywhere in the analysis pipeline.
///
/// Each variant belongs to one pipeline stage; [`Error::is_input_error`]
/// separates problems with the inputs from violated internal invariants.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: no debug info (missing {})", path.display(), missing.join(", "))]
    NoDebugInfo { path: PathBuf, missing: Vec<String> },

    #[error("decode error at offset {offset:#x}: {message}")]
    Decode { offset: u64, message: String },

    #[error("fixture parse error at {line}:{column}: {message}")]
    FixtureParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("source parse error at {line}:{column}: {message}")]
    SourceParse {
        line: u32,
        column: u32,
        /// The construct that could not be handled, e.g. `goto`.
        construct: String,
        message: String,
    },

    #[error("trace parse error at line {line}: {message}")]
    TraceParse { line: usize, message: String },

    #[error("trace validation error at line {line}: {message}")]
    TraceValidation { line: usize, message: String },

    #[error("invalid lifecycle state: violates `{0}`")]
    InvalidState(crate::coverage::Implication),

    #[error("correlation: {0}")]
    Correlation(String),

    #[error("report: {0}")]
    Report(String),

    #[error("compare: {0}")]
    Compare(String),

    #[error("source missing: {0}")]
    SourceMissing(String),

    /// An error located in a particular input file.
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the inputs (as opposed to a bug in this crate).
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::InFile { source, .. } => source.is_input_error(),
            other => !matches!(other, Error::Invariant(_)),
        }
    }

    /// Short name of the pipeline stage the error came from.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::NoDebugInfo { .. } | Error::Decode { .. } => "debug-model",
            Error::FixtureParse { .. } | Error::Validation(_) => "debug-model",
            Error::SourceParse { .. } | Error::SourceMissing(_) => "source-scope",
            Error::InvalidState(_) => "coverage-core",
            Error::TraceParse { .. } | Error::TraceValidation { .. } => "reachability",
            Error::Correlation(_) | Error::Report(_) | Error::Compare(_) => "report",
            Error::InFile { source, .. } => source.module(),
            Error::Invariant(_) => "internal",
        }
    }
}
