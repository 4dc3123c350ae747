use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file. `location` is a line number or record id.
    #[error("{path}: {location}: {message}")]
    Parse {
        path: PathBuf,
        location: String,
        message: String,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("unknown {kind} `{id}`")]
    Lookup { kind: &'static str, id: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("pairing error: {0}")]
    Pairing(String),

    #[error("no sense for `{lemma}` ({pos}) in lexicon")]
    NoSense { lemma: String, pos: String },

    #[error("no replacement candidates for `{lemma}` in synset {synset}")]
    NoCandidate { lemma: String, synset: String },

    #[error("scorer failed on sentence {sentence:?}: {message}")]
    Scoring { sentence: String, message: String },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("training diverged at epoch {epoch}, batch {batch} (loss = {loss})")]
    Divergence { epoch: usize, batch: usize, loss: f64 },

    /// Error annotated with the coordinates of the experiment cell it came from.
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        path: impl Into<PathBuf>,
        location: impl ToString,
        message: impl ToString,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            location: location.to_string(),
            message: message.to_string(),
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad input data (as opposed to misuse).
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Contract(_))
    }
}
