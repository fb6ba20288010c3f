//! Exact shares and fairness checkers.
//!
//! Shares are returned as exact rationals in true value units. Checkers return
//! one [`AgentVerdict`] per agent, with a witness explaining the outcome.

mod check;
mod oracle;

pub use check::{
    check, check_aprop, check_envy, check_prop1, check_rho_tps, check_share, AgentVerdict, EnvyNotion, ShareNotion,
    Witness,
};
pub use oracle::{
    mms_binary, mms_exact, mms_share, mms_two_valued_counts, mms_unit_demand, mxs_exact, prop_share, tps, tps_raw,
    truncate_over_proportional, MmsResult, TwoValuedMms, MMS_CAP_M, MMS_TWO_AGENT_CAP_M, MXS_CAP_M,
};

use alloc::vec::Vec;
use thiserror::Error;

use crate::model::{Instance, ModelError, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShareError {
    #[error("share needs {expected} valuations, got {got}")]
    WrongKind { expected: &'static str, got: &'static str },
    #[error("share is undefined for zero agents")]
    ZeroAgents,
    #[error("exact oracle capacity exceeded (m = {m}, n = {n})")]
    Capacity { m: usize, n: usize },
    #[error("allocation covers {got} items, instance has {expected}")]
    AllocationShape { got: usize, expected: usize },
    #[error("allocation has {got} agents, instance has {expected}")]
    AgentCount { got: usize, expected: usize },
    #[error("rho must lie in (0, 1]")]
    BadRho,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `n / (2n - 1)`, the default approximation factor for truncated shares.
pub fn default_rho(n: usize) -> Value {
    Value::new(n as u128, (2 * n as u128).saturating_sub(1).max(1))
}

/// Fairness notions the checkers understand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FairnessNotion {
    Prop1Strict,
    Prop1Weak,
    RhoTps(Value),
    Aprop,
    Ef,
    Ef1,
    Efx,
    Eqx,
    Mms,
    RhoMms(Value),
    Mxs,
}

impl FairnessNotion {
    pub fn name(&self) -> &'static str {
        match self {
            FairnessNotion::Prop1Strict => "prop1",
            FairnessNotion::Prop1Weak => "prop1-weak",
            FairnessNotion::RhoTps(_) => "rho-tps",
            FairnessNotion::Aprop => "aprop",
            FairnessNotion::Ef => "ef",
            FairnessNotion::Ef1 => "ef1",
            FairnessNotion::Efx => "efx",
            FairnessNotion::Eqx => "eqx",
            FairnessNotion::Mms => "mms",
            FairnessNotion::RhoMms(_) => "rho-mms",
            FairnessNotion::Mxs => "mxs",
        }
    }
}

/// Per-agent shares. `mms` and `mxs` are `None` when no exact oracle applies
/// at this size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareProfile {
    pub prop: Value,
    pub tps: Value,
    pub mms: Option<Value>,
    pub mxs: Option<Value>,
}

/// Share profile of every agent of an additive instance.
pub fn share_profiles(inst: &Instance) -> Result<Vec<ShareProfile>, ShareError> {
    let n = inst.n();
    inst.valuations()
        .iter()
        .map(|v| {
            Ok(ShareProfile {
                prop: prop_share(v, n)?,
                tps: tps(v, n)?,
                mms: mms_share(v, n).ok(),
                mxs: mxs_exact(v, n).ok(),
            })
        })
        .collect()
}
