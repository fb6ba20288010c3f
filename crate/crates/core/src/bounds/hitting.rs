//! Minimal hitting sets of allocations by exact set cover.

use alloc::vec::Vec;

use super::{all_allocations, common_shape, Acceptance, BoundsError, Judge};
use crate::model::{Allocation, Instance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HittingSetResult {
    pub allocations: Vec<Allocation>,
    pub size: usize,
    /// The search finished, so no smaller hitting set exists.
    pub exact: bool,
}

impl HittingSetResult {
    /// Deterministic description cost of the set, `ceil(log2 size)` bits.
    pub fn bits(&self) -> u32 {
        description_bits(self.size)
    }
}

/// `ceil(log2 size)`, with 0 for sizes up to 1.
pub fn description_bits(size: usize) -> u32 {
    size.max(1).next_power_of_two().trailing_zeros()
}

type Bits = Vec<u64>;

fn covers(set: &Bits, i: usize) -> bool {
    set[i / 64] >> (i % 64) & 1 == 1
}

fn count(set: &Bits) -> usize {
    set.iter().map(|w| w.count_ones() as usize).sum()
}

/// Smallest set of allocations such that every instance is served by one of
/// them. Iterative deepening over set sizes below the greedy solution, with
/// `budget` search nodes in total; when the budget runs out the best set
/// found so far is returned with `exact = false`.
pub fn min_hitting_set(
    instances: &[Instance],
    acceptance: Acceptance,
    budget: u64,
) -> Result<HittingSetResult, BoundsError> {
    let (n, m) = common_shape(instances)?;
    let judges = instances.iter().map(|i| Judge::new(i, acceptance)).collect::<Result<Vec<_>, _>>()?;
    let words = instances.len().div_ceil(64);

    // Cover sets, one per distinct non-empty pattern.
    let mut sets: Vec<(Bits, Allocation)> = Vec::new();
    for alloc in all_allocations(n, m)? {
        let mut bits = alloc::vec![0u64; words];
        for (i, judge) in judges.iter().enumerate() {
            if judge.serves(&alloc)? {
                bits[i / 64] |= 1 << (i % 64);
            }
        }
        if count(&bits) > 0 {
            sets.push((bits, alloc));
        }
    }
    sets.sort_by(|a, b| a.0.cmp(&b.0));
    sets.dedup_by(|a, b| a.0 == b.0);
    // Largest sets first, so both searches try promising allocations early.
    sets.sort_by_key(|s| core::cmp::Reverse(count(&s.0)));
    if let Some(index) = (0..instances.len()).find(|&i| !sets.iter().any(|s| covers(&s.0, i))) {
        return Err(BoundsError::Uncoverable { index });
    }

    let greedy = greedy_cover(&sets, instances.len());
    let mut search = Search { sets: &sets, total: instances.len(), nodes: 0, budget };
    for size in 1..greedy.len() {
        let mut chosen = Vec::with_capacity(size);
        match search.cover(&mut chosen, &alloc::vec![0u64; words], size) {
            Some(true) => return Ok(result(&sets, &chosen, true)),
            Some(false) => continue,
            None => return Ok(result(&sets, &greedy, false)),
        }
    }
    Ok(result(&sets, &greedy, true))
}

fn result(sets: &[(Bits, Allocation)], chosen: &[usize], exact: bool) -> HittingSetResult {
    let allocations: Vec<Allocation> = chosen.iter().map(|&s| sets[s].1.clone()).collect();
    HittingSetResult { size: allocations.len(), allocations, exact }
}

fn greedy_cover(sets: &[(Bits, Allocation)], total: usize) -> Vec<usize> {
    let mut covered = alloc::vec![0u64; total.div_ceil(64)];
    let mut chosen = Vec::new();
    while count(&covered) < total {
        let gain = |s: &Bits| s.iter().zip(&covered).map(|(a, c)| (a & !c).count_ones()).sum::<u32>();
        let best = (0..sets.len()).max_by_key(|&s| (gain(&sets[s].0), core::cmp::Reverse(s))).expect("sets cover");
        for (c, a) in covered.iter_mut().zip(&sets[best].0) {
            *c |= a;
        }
        chosen.push(best);
    }
    chosen
}

struct Search<'s> {
    sets: &'s [(Bits, Allocation)],
    total: usize,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    /// `Some(true)` if `left` more sets can complete the cover, `Some(false)`
    /// if provably not, `None` if the budget ran out.
    fn cover(&mut self, chosen: &mut Vec<usize>, covered: &Bits, left: usize) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        let open: Vec<usize> = (0..self.total).filter(|&i| !covers(covered, i)).collect();
        if open.is_empty() {
            return Some(true);
        }
        if left == 0 {
            return Some(false);
        }
        let gain = |s: &Bits| open.iter().filter(|&&i| covers(s, i)).count();
        let best_gain = self.sets.iter().map(|s| gain(&s.0)).max().unwrap_or(0);
        if best_gain * left < open.len() {
            return Some(false);
        }
        // Branch on the open instance with the fewest serving allocations.
        let pivot = *open
            .iter()
            .min_by_key(|&&i| self.sets.iter().filter(|s| covers(&s.0, i)).count())
            .expect("open is non-empty");
        for s in 0..self.sets.len() {
            if !covers(&self.sets[s].0, pivot) {
                continue;
            }
            let next: Bits = covered.iter().zip(&self.sets[s].0).map(|(c, a)| c | a).collect();
            chosen.push(s);
            match self.cover(chosen, &next, left - 1) {
                Some(false) => {
                    chosen.pop();
                }
                other => return other,
            }
        }
        Some(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Valuation;
    use crate::shares::FairnessNotion;
    use alloc::vec;

    #[test]
    fn single_instance_needs_one_allocation() {
        let inst = Instance::new(vec![Valuation::additive(vec![1, 2, 3]); 2]).unwrap();
        let h = min_hitting_set(&[inst], FairnessNotion::Mms.into(), 1 << 20).unwrap();
        assert_eq!((h.size, h.exact, h.bits()), (1, true, 0));
    }

    #[test]
    fn description_bits_examples() {
        assert_eq!(description_bits(0), 0);
        assert_eq!(description_bits(1), 0);
        assert_eq!(description_bits(2), 1);
        assert_eq!(description_bits(3), 2);
        assert_eq!(description_bits(8), 3);
    }

    #[test]
    fn uncoverable_instance_is_reported() {
        // Envy-freeness is impossible with one item and two agents who want it.
        let inst = Instance::new(vec![Valuation::additive(vec![1]); 2]).unwrap();
        let err = min_hitting_set(&[inst], FairnessNotion::Ef.into(), 100).unwrap_err();
        assert_eq!(err, BoundsError::Uncoverable { index: 0 });
    }
}
