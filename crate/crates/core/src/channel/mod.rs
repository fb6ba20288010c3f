//! Common random string, bit codes and the metered reply channel.

mod codes;
mod crs;
mod transcript;

pub use codes::{
    binomial, choice_width, encode_choice, encode_subset_rank, encode_uint, encode_unary, subset_rank, subset_unrank,
    BitReader,
};
pub use crs::{derive_seed, Crs};
pub use transcript::{Answer, Channel, Entry, Reply, Transcript};

use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("reply ended early")]
    Truncated,
    #[error("malformed {0}")]
    Malformed(&'static str),
    #[error("a choice needs at least one alternative")]
    ZeroAlternatives,
    #[error("choice {index} out of range for {k} alternatives")]
    ChoiceOutOfRange { index: u64, k: u64 },
    #[error("unary code needs a positive length")]
    UnaryZero,
    #[error("subset has {got} elements, expected {expected}")]
    SubsetSize { got: usize, expected: usize },
    #[error("subset element repeated or out of range")]
    SubsetOutOfRange,
    #[error("subset universe too large for a 128-bit rank")]
    TooLarge,
    #[error("no agent {agent}")]
    UnknownAgent { agent: usize },
    #[error("recorded transcript ran out of replies")]
    ReplayExhausted,
    #[error("recorded reply {index} does not match the question to agent {agent} ({label})")]
    ReplayMismatch { index: usize, agent: usize, label: String },
    #[error("{unused} recorded replies were never asked for")]
    ReplayLeftover { unused: usize },
    #[error("bad transcript dump at line {line}")]
    BadDump { line: usize },
}
