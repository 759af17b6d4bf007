use std::fmt;

/// Errors produced by the estimators and the study harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure ({context}): {reason}")]
    Numerical { context: String, reason: String },

    /// Some (class-1, class-2) pair never shared a test fold.
    #[error(
        "{uncovered} of {total} observation pairs never co-occur in a test fold \
         (first: ({}, {})); increase M to at least {suggested_m}",
        first.0, first.1
    )]
    Coverage {
        uncovered: usize,
        total: usize,
        first: (usize, usize),
        suggested_m: usize,
    },

    #[error("study aborted: {failed} of {trials} trials failed (first failure: {first})")]
    StudyAborted {
        failed: usize,
        trials: usize,
        first: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl fmt::Display) -> Self {
        Error::InvalidInput(msg.to_string())
    }

    pub(crate) fn numerical(context: impl fmt::Display, reason: impl fmt::Display) -> Self {
        Error::Numerical {
            context: context.to_string(),
            reason: reason.to_string(),
        }
    }

    /// Prefix the context of a numerical failure, leaving other variants alone.
    pub fn within(self, outer: impl fmt::Display) -> Self {
        match self {
            Error::Numerical { context, reason } => Error::Numerical {
                context: format!("{outer}: {context}"),
                reason,
            },
            other => other,
        }
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }
}
