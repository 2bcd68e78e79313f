//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A line of an input file failed to parse.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Two documents share one sequential docid.
    #[error("duplicate sequential docid shared by '{first}' and '{second}'")]
    DuplicateSeqDocid { first: String, second: String },

    /// A corpus-level invariant does not hold.
    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    /// A caller-supplied argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Top-m selection asked for more strictly positive weights than exist.
    #[error(
        "set-docid shortfall: requested top-{requested} but only {available} \
         strictly positive weights are available"
    )]
    TopMShortfall { requested: usize, available: usize },

    /// More documents than distinct length-L sequences over the vocabulary.
    #[error("docid space exhausted: {requested} documents > {capacity} = V^L")]
    DocidSpaceExhausted { requested: usize, capacity: u128 },

    /// An external scoring process violated the wire protocol.
    #[error("scorer protocol error: {msg} (request: {request})")]
    Protocol { msg: String, request: String },

    /// A scoring backend failed outside the protocol layer.
    #[error("scorer error: {0}")]
    Scorer(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
