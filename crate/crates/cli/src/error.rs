//! CLI errors and the process exit-code table.
//!
//! | code | class                                                         |
//! |------|---------------------------------------------------------------|
//! | 0    | report written                                                |
//! | 1    | I/O failure (unreadable input, unwritable output)             |
//! | 2    | configuration error (bad flag values, conflicting inputs)     |
//! | 3    | parse error in an input file (reported with its line number)  |
//! | 4    | invalid input data (matrix or trace contents)                 |
//! | 5    | model selection error (unknown id, suspect among controls)    |
//! | 6    | untestable request (too few candidates or prompts)            |

use std::path::PathBuf;

use mps_core::MpsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {message}", location(.path, .line))]
    Parse {
        path: PathBuf,
        line: Option<u64>,
        message: String,
    },

    #[error(transparent)]
    Domain(#[from] MpsError),
}

fn location(path: &std::path::Path, line: &Option<u64>) -> String {
    match line {
        Some(l) => format!("{}:{l}", path.display()),
        None => path.display().to_string(),
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: Option<u64>, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Parse { .. } => 3,
            CliError::Domain(e) => match e {
                MpsError::InvalidConfig(_) | MpsError::InvalidScenario(_) => 2,
                MpsError::EmptyMatrix
                | MpsError::NonFinite { .. }
                | MpsError::OutOfRange { .. }
                | MpsError::DuplicateModelId(_)
                | MpsError::ShapeMismatch(_)
                | MpsError::KindMismatch(_)
                | MpsError::LengthMismatch { .. }
                | MpsError::DimensionMismatch { .. }
                | MpsError::ZeroNormEmbedding { .. }
                | MpsError::InvalidTrace { .. } => 4,
                MpsError::UnknownModelId(_)
                | MpsError::OverlappingSuspectControl(_)
                | MpsError::NoControls => 5,
                MpsError::EmptyCandidateSet
                | MpsError::InactiveSetEmpty
                | MpsError::InactiveSetTooSmall(_)
                | MpsError::InsufficientPrompts(_)
                | MpsError::CandidateSetTooSmallForNI(_)
                | MpsError::SearchSpaceTooLarge(_) => 6,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_distinct_per_class() {
        let io = CliError::io("x", std::io::Error::other("boom"));
        let cases = [
            (io, 1),
            (CliError::Config("bad".into()), 2),
            (CliError::parse("m.csv", Some(3), "bad float"), 3),
            (MpsError::DuplicateModelId("A".into()).into(), 4),
            (MpsError::OverlappingSuspectControl("A".into()).into(), 5),
            (MpsError::CandidateSetTooSmallForNI(1).into(), 6),
            (MpsError::InvalidConfig("alpha".into()).into(), 2),
        ];
        for (err, code) in cases {
            assert_eq!(err.exit_code(), code, "{err}");
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = CliError::parse("m.csv", Some(7), "expected 3 fields");
        assert_eq!(e.to_string(), "m.csv:7: expected 3 fields");
    }
}
