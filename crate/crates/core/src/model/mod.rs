//! Valuations, instances and allocations.

mod allocation;
mod generate;
mod valuation;

pub use allocation::Allocation;
pub use generate::{gen_instance, Family};
pub use valuation::{ud_to_binary, Instance, Valuation, ValuationKind};

use thiserror::Error;

/// Exact value of a bundle, in true units (numerator over the valuation scale).
pub type Value = num_rational::Ratio<u128>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("item index {index} out of range for {m} items")]
    ItemOutOfRange { index: usize, m: usize },
    #[error("agent index {index} out of range for {n} agents")]
    AgentOutOfRange { index: usize, n: usize },
    #[error("scale must be positive")]
    ZeroScale,
    #[error("instance needs at least one agent and one item")]
    Empty,
    #[error("valuation {agent} has {got} items, expected {expected}")]
    ShapeMismatch { agent: usize, got: usize, expected: usize },
    #[error("valuation {agent} does not share the instance scale")]
    ScaleMismatch { agent: usize },
    #[error("valuations mix kinds; use the additive kind for mixed instances")]
    MixedKinds,
    #[error("value {value} of item {item} violates the {kind} class")]
    ClassViolation { item: usize, value: u64, kind: &'static str },
    #[error("two-valued class needs high > low (got {high}, {low})")]
    BadTwoValues { high: u64, low: u64 },
    #[error("operation needs a {expected} valuation")]
    WrongKind { expected: &'static str },
    #[error("binary reduction needs m >= n (m = {m}, n = {n})")]
    TooFewItems { m: usize, n: usize },
    #[error("infeasible family parameters: {0}")]
    Infeasible(&'static str),
}
