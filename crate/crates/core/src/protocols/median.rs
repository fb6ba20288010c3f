//! Median decomposition over a line of items, and the Prop1 protocols built
//! on it.
//!
//! Each agent privately holds a nested partition of the line into
//! consecutive bundles (bundle `j` ends where bundle `j + 1` starts). A
//! subproblem is a set of `n'` agents, a range `[lo, hi)` of the line and
//! the index `b0` of its first bundle. The referee learns the median of the
//! agents' cuts after bundle `b0 + n'/2 - 1`; agents with smaller cuts
//! recurse on the left part, the rest on the right part.

use alloc::vec::Vec;

use super::{ask, Decided, Memo, Outcome, ProtocolError, ProtocolId, PublicParams};
use crate::channel::{Channel, Crs, Reply};
use crate::model::{Instance, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MedianVariant {
    /// Every agent reports her cut at every level.
    Det,
    /// Random splitter selection: only splitters report cuts, the others
    /// send one comparison bit.
    Rand,
}

pub fn prop1_allocate(inst: &Instance, crs: &Crs, variant: MedianVariant) -> Result<Outcome, ProtocolError> {
    ProtocolId::Prop1(variant).run(inst, crs)
}

/// Start positions of bundles `0..=n` of the threshold partition of `order`:
/// bundle `j` ends at the first position where the running value reaches
/// `(j + 1) / n` of the total. `cuts[0] = 0` and `cuts[n] = order.len()`.
fn prop1_cuts(v: &Valuation, n: usize, order: &[usize]) -> Vec<usize> {
    let total = v.raw_value(order.iter().copied());
    let len = order.len();
    let mut cuts = alloc::vec![0; n + 1];
    let mut acc: u128 = 0;
    let mut p = 0;
    for (j, cut) in cuts.iter_mut().enumerate().take(n).skip(1) {
        let goal = j as u128 * total;
        while p < len && (p == 0 || acc * (n as u128) < goal) {
            acc += v.item(order[p]) as u128;
            p += 1;
        }
        *cut = p.max(1).min(len);
    }
    cuts[n] = len;
    cuts
}

/// A contiguous partition of `order` into `n` bundles in which every bundle
/// satisfies strict Prop1 for `v`: a bundle that falls short is completed by
/// the item just left of it.
pub fn agent_prop1_partition(v: &Valuation, n: usize, order: &[usize]) -> Vec<Vec<usize>> {
    let cuts = prop1_cuts(v, n, order);
    (0..n).map(|j| order[cuts[j]..cuts[j + 1].max(cuts[j])].to_vec()).collect()
}

/// Final piece of the decomposition: `agent` gets `[lo, hi)` of the line and
/// is responsible for bundle `bundle` of her partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Leaf {
    pub agent: usize,
    pub lo: usize,
    pub hi: usize,
    pub bundle: usize,
}

/// Agent-side cut oracle: `(agent, valuation, j)` gives the start of bundle
/// `j` of the agent's partition.
pub(crate) type CutOf<'c> = dyn Fn(usize, &Valuation, usize) -> Result<usize, &'static str> + 'c;

/// Runs the decomposition. `floor_one` keeps cuts at least 1 (partitions
/// whose first bundle is never empty); otherwise every cut inside a
/// non-empty range is strictly right of its start.
pub(crate) fn decompose(
    ch: &mut Channel<'_>,
    variant: MedianVariant,
    priority: &[usize],
    agents: Vec<usize>,
    len: usize,
    floor_one: bool,
    cut_of: &CutOf<'_>,
) -> Result<Vec<Leaf>, ProtocolError> {
    let mut leaves = Vec::with_capacity(agents.len());
    let mut stack = alloc::vec![(agents, 0usize, len, 0usize)];
    while let Some((group, lo, hi, b0)) = stack.pop() {
        match group.len() {
            0 => continue,
            1 => {
                leaves.push(Leaf { agent: group[0], lo, hi, bundle: b0 });
                continue;
            }
            _ => {}
        }
        let j = group.len() / 2;
        let floor = if floor_one { lo.max(1).min(hi) } else { (lo + 1).min(hi) };
        let width = hi - floor + 1;
        let report = |ch: &mut Channel<'_>, a: usize, label: &str| -> Result<usize, ProtocolError> {
            let mut ans = ask(ch, a, label, |v| {
                let c = cut_of(a, v, b0 + j)?;
                if c < floor || c > hi {
                    return Err("cut outside the subproblem");
                }
                Ok(Reply::new().choice(c - floor, width))
            })?;
            let c = floor + ans.choice(width)?;
            ans.finish()?;
            Ok(c)
        };
        let (mut left, mut right, median) = match variant {
            MedianVariant::Det => {
                let mut keyed = Vec::with_capacity(group.len());
                for &a in &group {
                    keyed.push((report(ch, a, "cut")?, a));
                }
                keyed.sort_unstable();
                let median = keyed[j - 1].0;
                let left = keyed[..j].iter().map(|&(_, a)| a).collect::<Vec<_>>();
                let right = keyed[j..].iter().map(|&(_, a)| a).collect::<Vec<_>>();
                (left, right, median)
            }
            MedianVariant::Rand => {
                let (mut left, mut right) = (Vec::new(), Vec::new());
                let mut cands = group.clone();
                let mut want = j;
                loop {
                    let s = *cands.iter().min_by_key(|&&a| priority[a]).expect("candidates never run dry");
                    let cs = report(ch, s, "cut")?;
                    let (mut lower, mut higher) = (Vec::new(), Vec::new());
                    for &a in cands.iter().filter(|&&a| a != s) {
                        let mut ans =
                            ask(ch, a, "side", |v| Ok(Reply::new().flag((cut_of(a, v, b0 + j)?, a) > (cs, s))))?;
                        if ans.flag()? {
                            higher.push(a);
                        } else {
                            lower.push(a);
                        }
                        ans.finish()?;
                    }
                    if lower.len() + 1 == want {
                        left.extend(lower);
                        left.push(s);
                        right.extend(higher);
                        break (left, right, cs);
                    } else if lower.len() >= want {
                        right.extend(higher);
                        right.push(s);
                        cands = lower;
                    } else {
                        want -= lower.len() + 1;
                        left.extend(lower);
                        left.push(s);
                        cands = higher;
                    }
                }
            }
        };
        left.sort_unstable();
        right.sort_unstable();
        stack.push((right, median, hi, b0 + j));
        stack.push((left, lo, median, b0));
    }
    Ok(leaves)
}

/// Priority order of agents for random splitter selection.
pub(crate) fn priorities(crs: &Crs, n: usize) -> Vec<usize> {
    let order = crs.permutation("median-priority", n);
    let mut rank = alloc::vec![0; n];
    for (r, &a) in order.iter().enumerate() {
        rank[a] = r;
    }
    rank
}

pub(crate) fn referee_prop1(
    p: &PublicParams,
    crs: &Crs,
    ch: &mut Channel<'_>,
    variant: MedianVariant,
) -> Result<Decided, ProtocolError> {
    let (n, m) = (p.n, p.m);
    let order: Vec<usize> = (0..m).collect();
    let memo: Memo<Vec<usize>> = Memo::new(n);
    let cut_of = |a: usize, v: &Valuation, j: usize| Ok(memo.with(a, || prop1_cuts(v, n, &order), |c| c[j]));
    let leaves = decompose(ch, variant, &priorities(crs, n), (0..n).collect(), m, true, &cut_of)?;
    let mut owner = alloc::vec![0; m];
    for leaf in leaves {
        owner[leaf.lo..leaf.hi].fill(leaf.agent);
    }
    Ok(Decided::from_owner(owner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shares::{check_prop1, Witness};
    use alloc::vec;

    #[test]
    fn partition_examples() {
        let ones = Valuation::additive(vec![1; 8]);
        let order: Vec<usize> = (0..8).collect();
        assert_eq!(agent_prop1_partition(&ones, 2, &order), vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
        let spike = Valuation::additive(vec![4, 0, 0, 0]);
        assert_eq!(agent_prop1_partition(&spike, 2, &order[..4]), vec![vec![0], vec![1, 2, 3]]);
        assert_eq!(agent_prop1_partition(&spike, 1, &order[..4]), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn partition_bundles_pass_prop1() {
        let v = Valuation::additive(vec![3, 0, 7, 1, 1, 9, 0, 2, 5]);
        let order: Vec<usize> = (0..9).collect();
        for n in 1..=6 {
            // Every agent shares v and holds one bundle.
            let mut owner = vec![usize::MAX; 9];
            for (a, b) in agent_prop1_partition(&v, n, &order).iter().enumerate() {
                for &e in b {
                    owner[e] = a;
                }
            }
            let inst = Instance::new(vec![v.clone(); n]).unwrap();
            let alloc = crate::model::Allocation::new(n, owner).unwrap();
            assert!(check_prop1(&inst, &alloc, true).unwrap().iter().all(|x| x.pass), "n = {n}");
        }
    }

    #[test]
    fn two_agents_all_ones_costs_six_bits() {
        let inst = Instance::new(vec![Valuation::additive(vec![1; 8]); 2]).unwrap();
        let out = prop1_allocate(&inst, &Crs::new(0), MedianVariant::Det).unwrap();
        assert_eq!(out.transcript.integer_bits(), 6);
        assert_eq!(out.allocation.bundles(), vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
        let v = check_prop1(&inst, &out.allocation, true).unwrap();
        assert!(v.iter().all(|x| x.pass && x.witness == Witness::Met));
    }

    #[test]
    fn randomized_matches_fairness() {
        let inst = Instance::new(vec![
            Valuation::additive(vec![5, 1, 1, 0, 2, 8, 3]),
            Valuation::additive(vec![0, 4, 4, 4, 1, 1, 1]),
            Valuation::additive(vec![2, 2, 2, 2, 2, 2, 2]),
            Valuation::additive(vec![9, 0, 0, 0, 0, 0, 1]),
            Valuation::additive(vec![1, 0, 3, 0, 5, 0, 7]),
        ])
        .unwrap();
        for seed in 0..30 {
            let out = prop1_allocate(&inst, &Crs::new(seed), MedianVariant::Rand).unwrap();
            assert!(check_prop1(&inst, &out.allocation, true).unwrap().iter().all(|x| x.pass));
        }
    }
}
