//! Token-sequence codecs over road networks.
//!
//! Each submodule is one serialization format; `order` holds the
//! traversal-ordering policies they all share and `vocab` the shared
//! integer vocabulary. Decoders are strict: every malformed token is
//! rejected with the position of the offending integer.

pub mod coupled;
pub mod decoupled;
pub mod noise;
pub mod order;
pub mod sar;
pub mod vocab;

use thiserror::Error;

/// Why a sequence failed to encode or decode.
///
/// Position fields are absolute token offsets into the sequence handed
/// to the decoder.
#[derive(Debug, Error)]
pub enum CodecError {
    #[error("token {pos}: expected {expected}, got {got}")]
    Unexpected {
        pos: usize,
        expected: &'static str,
        got: u16,
    },
    #[error("token {pos}: {reason}")]
    Invalid { pos: usize, reason: String },
    #[error("sequence truncated at token {pos}: expected {expected}")]
    Truncated { pos: usize, expected: &'static str },
    #[error("sequence capacity exceeded: {0}")]
    Capacity(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Forest(#[from] crate::forest::ForestError),
}

impl CodecError {
    /// The token offset the error points at, when it points at one.
    pub fn position(&self) -> Option<usize> {
        match self {
            CodecError::Unexpected { pos, .. }
            | CodecError::Invalid { pos, .. }
            | CodecError::Truncated { pos, .. } => Some(*pos),
            _ => None,
        }
    }
}
