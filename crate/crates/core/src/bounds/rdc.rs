//! Acceptance-probability estimates and the lower bounds they imply.
//!
//! If every fixed allocation is acceptable for at most a `p` fraction of a
//! class of instances, randomized protocols for the class need
//! `Omega(log(1/p))` bits. The estimator computes, over an explicit or
//! sampled class, the largest such fraction among all allocations.

use alloc::vec::Vec;

use super::{all_allocations, common_shape, Acceptance, BoundsError, Judge, MAX_ENUMERATED_INSTANCES};
use crate::channel::{derive_seed, Crs};
use crate::model::{gen_instance, Allocation, Family, Instance, Valuation};
use crate::Value;

/// How the instance class is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Every instance of the family, each counted once.
    Exhaustive,
    /// `trials` seeded draws from the family generator.
    Sampled { trials: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdcEstimate {
    /// Instances served by the best allocation.
    pub successes: u64,
    pub trials: u64,
    /// Exact empirical fraction `successes / trials`.
    pub p_hat: Value,
    /// 95% Wilson interval for `p`; collapses to `p_hat` when exhaustive.
    pub ci_low: f64,
    pub ci_high: f64,
    /// `log2(1 / p_hat)`, or `log2(trials)` when no allocation serves any
    /// instance.
    pub bound_bits: f64,
    pub best: Option<Allocation>,
    pub exhaustive: bool,
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let t = trials as f64;
    let p = successes as f64 / t;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / t;
    let centre = (p + z2 / (2.0 * t)) / denom;
    let half = Z * libm::sqrt(p * (1.0 - p) / t + z2 / (4.0 * t * t)) / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Best acceptance fraction over `candidates`, or over every allocation when
/// `candidates` is `None`.
pub fn estimate_over(
    instances: &[Instance],
    candidates: Option<&[Allocation]>,
    acceptance: Acceptance,
    exhaustive: bool,
) -> Result<RdcEstimate, BoundsError> {
    let (n, m) = common_shape(instances)?;
    let judges = instances.iter().map(|i| Judge::new(i, acceptance)).collect::<Result<Vec<_>, _>>()?;
    let mut best: Option<(u64, Allocation)> = None;
    let mut consider = |alloc: Allocation| -> Result<(), BoundsError> {
        let mut hits = 0u64;
        for j in &judges {
            hits += u64::from(j.serves(&alloc)?);
        }
        if best.as_ref().is_none_or(|(b, _)| hits > *b) {
            best = Some((hits, alloc));
        }
        Ok(())
    };
    match candidates {
        Some(list) => list.iter().cloned().try_for_each(&mut consider)?,
        None => all_allocations(n, m)?.try_for_each(&mut consider)?,
    }
    let trials = instances.len() as u64;
    let (successes, best) = match best {
        Some((s, a)) => (s, (s > 0).then_some(a)),
        None => (0, None),
    };
    let p_hat = Value::new(successes as u128, trials as u128);
    let (ci_low, ci_high) = if exhaustive {
        let p = successes as f64 / trials as f64;
        (p, p)
    } else {
        wilson_interval(successes, trials)
    };
    let bound_bits =
        if successes == 0 { libm::log2(trials as f64) } else { libm::log2(trials as f64 / successes as f64) };
    Ok(RdcEstimate { successes, trials, p_hat, ci_low, ci_high, bound_bits, best, exhaustive })
}

/// Estimate for `family` with `n` agents and `m` items.
pub fn estimate_rdc_bound(
    family: Family,
    acceptance: Acceptance,
    n: usize,
    m: usize,
    sampling: Sampling,
    crs: &Crs,
) -> Result<RdcEstimate, BoundsError> {
    let instances = match sampling {
        Sampling::Exhaustive => enumerate_family(family, n, m)?,
        Sampling::Sampled { trials } => sample_family(family, n, m, trials, crs)?,
    };
    estimate_over(&instances, None, acceptance, sampling == Sampling::Exhaustive)
}

/// `trials` instances of `family`; draw `t` uses seed
/// `derive_seed(crs.seed(), "rdc-instance", t)`.
pub fn sample_family(
    family: Family,
    n: usize,
    m: usize,
    trials: usize,
    crs: &Crs,
) -> Result<Vec<Instance>, BoundsError> {
    if trials == 0 {
        return Err(BoundsError::NoInstances);
    }
    (0..trials as u64).map(|t| Ok(gen_instance(family, n, m, derive_seed(crs.seed(), "rdc-instance", t))?)).collect()
}

/// Every instance of `family` with `n` agents and `m` items, for the
/// families whose support is a finite set of value placements: balanced
/// binary, the hard two-valued family, the hard unit-demand family and
/// identical or independent unit-demand rankings.
pub fn enumerate_family(family: Family, n: usize, m: usize) -> Result<Vec<Instance>, BoundsError> {
    // A generated instance fixes the value multiset, kind and scale.
    let template = gen_instance(family, n, m, 0)?;
    let v0 = template.valuation(0);
    let (kind, scale) = (v0.kind(), v0.scale());
    let rebuild = |values: Vec<u64>| Valuation::new(kind, values, scale);
    let placements = |v: &Valuation| -> Result<Vec<Valuation>, BoundsError> {
        let high = v.values().iter().copied().max().unwrap_or(0);
        let low = v.values().iter().copied().min().unwrap_or(0);
        let ones = v.values().iter().filter(|&&x| x == high).count();
        let subsets = crate::channel::binomial(m as u64, ones as u64).ok_or(BoundsError::TooManyInstances)?;
        if subsets > MAX_ENUMERATED_INSTANCES as u128 {
            return Err(BoundsError::TooManyInstances);
        }
        (0..subsets)
            .map(|rank| {
                let chosen = crate::channel::subset_unrank(rank, m, ones).expect("rank in range");
                let mut values = alloc::vec![low; m];
                for e in chosen {
                    values[e] = high;
                }
                Ok(rebuild(values)?)
            })
            .collect()
    };
    let rankings = || -> Result<Vec<Valuation>, BoundsError> {
        let mut values: Vec<u64> = (1..=m as u64).collect();
        let mut out = Vec::new();
        loop {
            if out.len() >= MAX_ENUMERATED_INSTANCES {
                return Err(BoundsError::TooManyInstances);
            }
            out.push(rebuild(values.clone())?);
            if !next_permutation(&mut values) {
                return Ok(out);
            }
        }
    };
    let (identical, per_agent) = match family {
        Family::BinaryBalanced { .. } | Family::TwoValuedHard { .. } => (true, placements(v0)?),
        Family::Ef1Hard { .. } => (false, placements(v0)?),
        Family::IdenticalUd => (true, rankings()?),
        Family::UdTopN => (false, rankings()?),
        other => return Err(BoundsError::NotEnumerable(other.name())),
    };
    if identical {
        return per_agent.into_iter().map(|v| Ok(Instance::new(alloc::vec![v; n])?)).collect();
    }
    let total = per_agent.len().checked_pow(n as u32).filter(|&t| t <= MAX_ENUMERATED_INSTANCES);
    let total = total.ok_or(BoundsError::TooManyInstances)?;
    (0..total)
        .map(|mut code| {
            let vals = (0..n)
                .map(|_| {
                    let v = per_agent[code % per_agent.len()].clone();
                    code /= per_agent.len();
                    v
                })
                .collect();
            Ok(Instance::new(vals)?)
        })
        .collect()
}

/// Lexicographic successor; false once `values` is the last permutation.
fn next_permutation(values: &mut [u64]) -> bool {
    let Some(i) = (1..values.len()).rev().find(|&i| values[i - 1] < values[i]) else {
        return false;
    };
    let j = (i..values.len()).rev().find(|&j| values[j] > values[i - 1]).expect("successor exists");
    values.swap(i - 1, j);
    values[i..].reverse();
    true
}
