//! Readability assessment toolkit.
//!
//! * [`textseg`]: sentence splitting, tokenization, syllables, surface counts
//! * [`formulas`]: GFI, FRE, FKGL, ARI, DCRF, SMOG and ASL
//! * [`langmodel`]: likelihood providers (n-gram, precomputed) and perplexity
//! * [`rsrs`]: word negative log-likelihood and the ranked sentence readability score
//! * [`metrics`]: Pearson correlation, measure rankings, confusion-matrix metrics, weighted kappa
//! * [`corpus`]: manifests, chunking, stratified splits and k-fold, synthetic corpora
//! * [`baseline`]: measure features plus multinomial logistic regression
//! * [`pipeline`]: the unsupervised and supervised evaluation runs behind the CLI

pub mod baseline;
pub mod corpus;
pub mod formulas;
pub mod langmodel;
pub mod metrics;
pub mod output;
pub mod pipeline;
pub mod rsrs;
pub mod textseg;

use thiserror::Error;

/// Error classes surfaced by the command-line tool. Each maps to an exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),
    #[error("input: {0}")]
    Input(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Input(_) => 3,
            Error::Degenerate(_) => 4,
            Error::Internal(_) => 5,
        }
    }

    /// Prefix the message with where the error happened.
    pub fn context(self, ctx: impl std::fmt::Display) -> Self {
        match self {
            Error::Usage(m) => Error::Usage(format!("{ctx}: {m}")),
            Error::Input(m) => Error::Input(format!("{ctx}: {m}")),
            Error::Degenerate(m) => Error::Degenerate(format!("{ctx}: {m}")),
            Error::Internal(m) => Error::Internal(format!("{ctx}: {m}")),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Input(e.to_string())
    }
}

impl From<formulas::FormulaError> for Error {
    fn from(e: formulas::FormulaError) -> Self {
        Error::Degenerate(e.to_string())
    }
}

impl From<langmodel::LmError> for Error {
    fn from(e: langmodel::LmError) -> Self {
        use langmodel::LmError::*;
        match e {
            EmptyCorpus | EmptyInput | EmptySentence | EmptyDocument(_) => Error::Degenerate(e.to_string()),
            InvalidOptions(_) => Error::Usage(e.to_string()),
            _ => Error::Input(e.to_string()),
        }
    }
}

impl From<rsrs::RsrsError> for Error {
    fn from(e: rsrs::RsrsError) -> Self {
        match e {
            rsrs::RsrsError::Provider(inner) => inner.into(),
            rsrs::RsrsError::InvalidProbability(_) => Error::Input(e.to_string()),
            _ => Error::Degenerate(e.to_string()),
        }
    }
}

impl From<metrics::MetricsError> for Error {
    fn from(e: metrics::MetricsError) -> Self {
        use metrics::MetricsError::*;
        match e {
            LabelOutOfRange { .. } | LengthMismatch(..) => Error::Input(e.to_string()),
            _ => Error::Degenerate(e.to_string()),
        }
    }
}

impl From<corpus::CorpusError> for Error {
    fn from(e: corpus::CorpusError) -> Self {
        use corpus::CorpusError::*;
        match e {
            EmptyClass(_) | ClassSmallerThanK { .. } => Error::Degenerate(e.to_string()),
            _ => Error::Input(e.to_string()),
        }
    }
}

impl From<baseline::BaselineError> for Error {
    fn from(e: baseline::BaselineError) -> Self {
        use baseline::BaselineError::*;
        match e {
            LanguageModel { doc_id, source } => Error::from(source).context(format!("document `{doc_id}`")),
            MissingProvider => Error::Usage(e.to_string()),
            DimensionMismatch { .. } | LabelOutOfRange { .. } | LengthMismatch { .. } => Error::Internal(e.to_string()),
            _ => Error::Degenerate(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
