//! Communication-metered fair allocation of indivisible goods.
//!
//! The crate is `no_std` (with `alloc`). It contains:
//!
//! - [`model`]: valuations, instances, allocations and the instance families
//!   used to stress protocols and lower bounds;
//! - [`shares`]: exact shares (proportional, truncated proportional, maximin,
//!   minimum EFX) and checkers for every fairness notion;
//! - [`channel`]: the common random string, self-delimiting bit codes and the
//!   metered transcript through which agents answer the referee;
//! - [`protocols`]: referee-driven allocation protocols returning an
//!   allocation together with its transcript;
//! - [`bounds`]: hitting sets, the acceptance-probability lower-bound estimator
//!   and the cyclic construction for `m = n + 1`.
//!
//! All fairness decisions use exact integer or rational arithmetic.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bounds;
pub mod channel;
pub mod model;
pub mod protocols;
pub mod shares;

pub use model::{Allocation, Instance, Valuation, ValuationKind, Value};
