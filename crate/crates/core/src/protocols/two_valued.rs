//! Maximin protocol for two-valued valuations with public values `a > b`.
//!
//! Agents report how many items they value at `a`. The referee orders agents
//! by that count, computes per-agent high-item quotas `a_i` and filler counts
//! `b_i` that guarantee every maximin share even if earlier agents took the
//! same high items, and agents then pick their high items in order.

use alloc::vec::Vec;

use super::{ask, Decided, Outcome, ProtocolError, ProtocolId, PublicParams};
use crate::channel::{Channel, Crs, Reply};
use crate::model::{Instance, ValuationKind};
use crate::shares::{mms_two_valued_counts, ShareError};

/// Largest `m` the quota search accepts.
pub const TWO_VALUED_CAP_M: usize = 256;

pub fn two_valued_mms(inst: &Instance, crs: &Crs) -> Result<Outcome, ProtocolError> {
    ProtocolId::TwoValued.run(inst, crs)
}

/// Quotas `(a_k, b_k)` per agent in `order`, or `None` if infeasible.
/// The high-item constraint is `a_1 + ... + a_k <= m_k`.
fn quotas(
    counts: &[usize],
    needs: &[u128],
    m: usize,
    high: u128,
    low: u128,
    cap: usize,
) -> Option<Vec<(usize, usize)>> {
    const INF: usize = usize::MAX;
    let n = counts.len();
    let filler = |need: u128, a: usize| -> usize {
        let got = a as u128 * high;
        if got >= need {
            0
        } else if low == 0 {
            INF
        } else {
            usize::try_from((need - got).div_ceil(low)).unwrap_or(INF)
        }
    };
    // best[A] = fewest fillers so far with A high items handed out.
    let mut best = alloc::vec![INF; m + 1];
    best[0] = 0;
    let mut parents = Vec::with_capacity(n);
    for k in 0..n {
        let mut next = alloc::vec![INF; m + 1];
        let mut par = alloc::vec![0usize; m + 1];
        for (used, &b) in best.iter().enumerate() {
            if b == INF || used > counts[k] {
                continue;
            }
            for a in 0..=cap.min(counts[k] - used) {
                let f = filler(needs[k], a);
                if f == INF {
                    continue;
                }
                let cand = b.saturating_add(f);
                if used + a <= m && cand < next[used + a] {
                    next[used + a] = cand;
                    par[used + a] = a;
                }
            }
        }
        parents.push(par);
        best = next;
    }
    let end = (0..=m).find(|&used| best[used] != INF && used + best[used] <= m)?;
    let mut out = alloc::vec![(0, 0); n];
    let mut used = end;
    for k in (0..n).rev() {
        let a = parents[k][used];
        out[k] = (a, filler(needs[k], a));
        used -= a;
    }
    Some(out)
}

pub(crate) fn referee(p: &PublicParams, ch: &mut Channel<'_>) -> Result<Decided, ProtocolError> {
    let (n, m) = (p.n, p.m);
    if m > TWO_VALUED_CAP_M {
        return Err(ShareError::Capacity { m, n }.into());
    }
    let (high, low) = match p.kind {
        ValuationKind::TwoValued { high, low } => (high, low),
        _ => (p.scale, 0),
    };
    let mut counts = Vec::with_capacity(n);
    for i in 0..n {
        let mut a =
            ask(ch, i, "count", |v| Ok(Reply::new().choice(v.values().iter().filter(|&&x| x == high).count(), m + 1)))?;
        counts.push(a.choice(m + 1)?);
        a.finish()?;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (counts[i], i));
    let sorted: Vec<usize> = order.iter().map(|&i| counts[i]).collect();
    let needs = sorted
        .iter()
        .map(|&h| mms_two_valued_counts(h, m, high, low, n).map(|r| r.raw))
        .collect::<Result<Vec<_>, _>>()?;
    let plan = quotas(&sorted, &needs, m, high as u128, low as u128, m / n)
        .or_else(|| quotas(&sorted, &needs, m, high as u128, low as u128, m))
        .ok_or(ProtocolError::Failure("no quota plan meets every share"))?;

    let mut remaining: Vec<usize> = (0..m).collect();
    let mut bundles: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for (&i, &(a, _)) in order.iter().zip(&plan) {
        let mut ans = ask(ch, i, "pick", |v| {
            let mine: Vec<usize> = (0..remaining.len()).filter(|&q| v.item(remaining[q]) == high).take(a).collect();
            if mine.len() < a {
                return Err("too few high items remain");
            }
            Ok(Reply::new().subset(&mine, remaining.len()))
        })?;
        let picked = ans.subset(remaining.len(), a)?;
        ans.finish()?;
        for &q in picked.iter().rev() {
            bundles[i].push(remaining.remove(q));
        }
    }
    for (&i, &(_, b)) in order.iter().zip(&plan) {
        let take = b.min(remaining.len());
        bundles[i].extend(remaining.drain(..take));
    }
    bundles[order[n - 1]].extend(remaining);
    Ok(Decided::from_bundles(m, &bundles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_instance, Family, Valuation};
    use crate::shares::{check, FairnessNotion};

    fn mms_pass(inst: &Instance) -> bool {
        let out = two_valued_mms(inst, &Crs::new(0)).unwrap();
        check(inst, &out.allocation, FairnessNotion::Mms).unwrap().iter().all(|v| v.pass)
    }

    #[test]
    fn hard_family_example() {
        let inst = gen_instance(Family::TwoValuedHard { k: 2 }, 2, 10, 3).unwrap();
        assert!(mms_pass(&inst));
    }

    #[test]
    fn binary_degenerate() {
        let inst = Instance::new(alloc::vec![Valuation::binary(6, [0, 1, 2, 3]), Valuation::binary(6, [2, 3, 4, 5]),])
            .unwrap();
        assert!(mms_pass(&inst));
    }

    #[test]
    fn random_small_instances() {
        for seed in 0..40 {
            let inst = gen_instance(Family::TwoValuedRandom { high: 3, low: 1 }, 3, 9, seed).unwrap();
            assert!(mms_pass(&inst), "seed {seed}");
        }
    }
}
