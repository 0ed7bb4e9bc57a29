use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid mapping: {0}")]
    Mapping(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Input(String),

    #[error("duplicate case_id {case_id:?} (row {row})")]
    DuplicateCaseId { case_id: String, row: usize },

    #[error("unknown attribute {0:?} (expected one of sex, age, race, ses)")]
    UnknownAttribute(String),

    #[error("cohort is frozen; {0} rejected")]
    Frozen(&'static str),

    #[error("{attribute}: group {group:?} has no cases")]
    EmptyGroup { attribute: String, group: String },

    #[error("{0}")]
    Precondition(String),

    #[error("design has no rows after filtering")]
    EmptyDesign,

    #[error("design matrix is rank deficient; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("logistic fit did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("design row is missing column {0:?}")]
    MissingColumn(String),

    #[error(
        "bootstrap discarded {discarded} of {requested} resamples (cap {cap:.1}%); data too sparse for a stable bootstrap"
    )]
    DiscardCapExceeded {
        discarded: usize,
        requested: usize,
        cap: f64,
    },
}

impl Error {
    /// Process exit status for the command-line tool: 2 for input problems,
    /// 3 for degenerate statistics, 4 when the bootstrap discard cap is hit.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Mapping(_)
            | Error::Config(_)
            | Error::Input(_)
            | Error::DuplicateCaseId { .. }
            | Error::UnknownAttribute(_)
            | Error::Frozen(_) => 2,
            Error::EmptyGroup { .. }
            | Error::Precondition(_)
            | Error::EmptyDesign
            | Error::RankDeficient { .. }
            | Error::NotConverged { .. }
            | Error::MissingColumn(_) => 3,
            Error::DiscardCapExceeded { .. } => 4,
        }
    }
}
