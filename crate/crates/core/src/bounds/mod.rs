//! Lower-bound tools: exact minimal hitting sets, the acceptance-probability
//! estimator behind randomized description-complexity bounds, and the cyclic
//! construction for `m = n + 1` unit-demand instances.

mod cyclic;
mod hitting;
mod rdc;

use alloc::vec::Vec;

pub use cyclic::{cyclic_allocation, cyclic_mms_dc, CyclicAllocation};
pub use hitting::{description_bits, min_hitting_set, HittingSetResult};
pub use rdc::{
    enumerate_family, estimate_over, estimate_rdc_bound, sample_family, wilson_interval, RdcEstimate, Sampling,
};

use crate::model::{Allocation, Instance, ModelError};
use crate::shares::{check, mms_share, mxs_exact, FairnessNotion, ShareError};
use crate::Value;

/// Largest allocation space `n^m` the enumerating tools accept.
pub const MAX_ENUMERATED_ALLOCATIONS: usize = 1 << 22;

/// Largest instance class the exhaustive enumerator produces.
pub const MAX_ENUMERATED_INSTANCES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundsError {
    #[error(transparent)]
    Share(#[from] ShareError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("allocation space {n}^{m} is too large to enumerate")]
    TooManyAllocations { n: usize, m: usize },
    #[error("instance class is too large to enumerate")]
    TooManyInstances,
    #[error("family {0} cannot be enumerated exhaustively")]
    NotEnumerable(&'static str),
    #[error("no instances given")]
    NoInstances,
    #[error("instances disagree on n or m")]
    ShapeMismatch,
    #[error("instance {index} is served by no allocation")]
    Uncoverable { index: usize },
    #[error("{0}")]
    Precondition(&'static str),
    #[error("no rotation serves every agent")]
    NoRotation,
}

/// Which allocations count as acceptable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceptance {
    Notion(FairnessNotion),
    /// Every allocation is acceptable; a calibration baseline.
    Everything,
}

impl From<FairnessNotion> for Acceptance {
    fn from(notion: FairnessNotion) -> Self {
        Acceptance::Notion(notion)
    }
}

/// Acceptance test for one instance, with share thresholds computed once.
pub(crate) struct Judge<'a> {
    inst: &'a Instance,
    rule: Rule,
}

enum Rule {
    All,
    Threshold(Vec<Value>),
    Checker(FairnessNotion),
}

impl<'a> Judge<'a> {
    pub(crate) fn new(inst: &'a Instance, acceptance: Acceptance) -> Result<Self, ShareError> {
        let n = inst.n();
        let shares = |f: fn(&crate::Valuation, usize) -> Result<Value, ShareError>, rho: Value| {
            inst.valuations().iter().map(|v| Ok(rho * f(v, n)?)).collect::<Result<Vec<_>, ShareError>>()
        };
        let one = Value::from_integer(1);
        let rule = match acceptance {
            Acceptance::Everything => Rule::All,
            Acceptance::Notion(FairnessNotion::Mms) => Rule::Threshold(shares(mms_share, one)?),
            Acceptance::Notion(FairnessNotion::RhoMms(rho)) if rho > Value::from_integer(0) && rho <= one => {
                Rule::Threshold(shares(mms_share, rho)?)
            }
            Acceptance::Notion(FairnessNotion::Mxs) => Rule::Threshold(shares(mxs_exact, one)?),
            Acceptance::Notion(notion) => Rule::Checker(notion),
        };
        Ok(Judge { inst, rule })
    }

    pub(crate) fn serves(&self, alloc: &Allocation) -> Result<bool, ShareError> {
        match &self.rule {
            Rule::All => Ok(true),
            Rule::Threshold(shares) => Ok(self.inst.valuations().iter().zip(shares).enumerate().all(|(a, (v, s))| {
                let own = alloc.owner().iter().enumerate().filter(|&(_, &o)| o == a).map(|(e, _)| e);
                v.to_value(v.raw_value(own)) >= *s
            })),
            Rule::Checker(notion) => Ok(check(self.inst, alloc, *notion)?.iter().all(|v| v.pass)),
        }
    }
}

/// Every allocation of `m` items to `n` agents, item 0 varying fastest.
pub fn all_allocations(n: usize, m: usize) -> Result<impl Iterator<Item = Allocation>, BoundsError> {
    let count = allocation_count(n, m).ok_or(BoundsError::TooManyAllocations { n, m })?;
    Ok((0..count).map(move |mut code| {
        let owner = (0..m)
            .map(|_| {
                let a = code % n;
                code /= n;
                a
            })
            .collect();
        Allocation::new(n, owner).expect("owners are in range")
    }))
}

fn allocation_count(n: usize, m: usize) -> Option<usize> {
    if n == 0 {
        return None;
    }
    let count = n.checked_pow(u32::try_from(m).ok()?)?;
    (count <= MAX_ENUMERATED_ALLOCATIONS).then_some(count)
}

/// Common `(n, m)` of a non-empty instance list.
pub(crate) fn common_shape(instances: &[Instance]) -> Result<(usize, usize), BoundsError> {
    let first = instances.first().ok_or(BoundsError::NoInstances)?;
    let shape = (first.n(), first.m());
    if instances.iter().any(|i| (i.n(), i.m()) != shape) {
        return Err(BoundsError::ShapeMismatch);
    }
    Ok(shape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Valuation;
    use alloc::vec;

    #[test]
    fn enumeration_counts() {
        assert_eq!(all_allocations(3, 4).unwrap().count(), 81);
        assert_eq!(all_allocations(1, 5).unwrap().count(), 1);
        assert!(all_allocations(4, 40).is_err());
    }

    #[test]
    fn judge_agrees_with_checker() {
        let inst =
            Instance::new(vec![Valuation::additive(vec![3, 1, 4, 1, 5]), Valuation::additive(vec![2, 7, 1, 8, 2])])
                .unwrap();
        for notion in [FairnessNotion::Mms, FairnessNotion::Mxs, FairnessNotion::RhoMms(Value::new(3, 4))] {
            let judge = Judge::new(&inst, notion.into()).unwrap();
            for alloc in all_allocations(2, 5).unwrap() {
                let direct = check(&inst, &alloc, notion).unwrap().iter().all(|v| v.pass);
                assert_eq!(judge.serves(&alloc).unwrap(), direct);
            }
        }
    }
}
