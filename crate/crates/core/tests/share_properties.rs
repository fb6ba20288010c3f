//! Properties of the share oracles and fairness checkers, against
//! independent reference computations.

use fairbits_core::model::{Allocation, Instance, Valuation};
use fairbits_core::shares::{
    check, mms_binary, mms_exact, prop_share, tps, truncate_over_proportional, FairnessNotion,
};
use fairbits_core::Value;
use proptest::prelude::*;

fn additive(max_m: usize, max_value: u64) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..=max_value, 1..=max_m)
}

/// Removes over-proportional items in the order given by `pick`, which maps
/// the number of candidates to the index of the one to drop.
fn tps_by_removal(values: &[u64], n: usize, mut pick: impl FnMut(usize) -> usize) -> Value {
    let mut left: Vec<u64> = values.to_vec();
    let mut agents = n as u128;
    loop {
        let total: u128 = left.iter().map(|&x| x as u128).sum();
        let over: Vec<usize> = (0..left.len()).filter(|&q| left[q] as u128 * agents > total).collect();
        if over.is_empty() {
            return Value::new(total, agents);
        }
        left.remove(over[pick(over.len())]);
        agents -= 1;
    }
}

/// Every assignment of `m` items to `n` agents.
fn all_allocations(n: usize, m: usize) -> impl Iterator<Item = Allocation> {
    let count = n.pow(m as u32);
    (0..count).map(move |mut code| {
        let owner = (0..m)
            .map(|_| {
                let a = code % n;
                code /= n;
                a
            })
            .collect();
        Allocation::new(n, owner).unwrap()
    })
}

fn passes(inst: &Instance, alloc: &Allocation, notion: FairnessNotion) -> Vec<bool> {
    check(inst, alloc, notion).unwrap().iter().map(|v| v.pass).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn share_chain_holds(values in additive(10, 40), n in 1usize..=4) {
        let v = Valuation::additive(values);
        let mms = mms_exact(&v, n).unwrap().value;
        let t = tps(&v, n).unwrap();
        let p = prop_share(&v, n).unwrap();
        prop_assert!(mms <= t && t <= p, "mms {} tps {} prop {}", mms, t, p);
    }

    #[test]
    fn tps_ignores_removal_order(
        values in prop::collection::vec(prop_oneof![0u64..=5, 50u64..=1000], 1..=12),
        n in 1usize..=6,
        picks in prop::collection::vec(any::<usize>(), 12),
    ) {
        let first = tps_by_removal(&values, n, |_| 0);
        let last = tps_by_removal(&values, n, |k| k - 1);
        let mut it = picks.into_iter();
        let random = tps_by_removal(&values, n, |k| it.next().unwrap_or(0) % k);
        prop_assert_eq!(first, last);
        prop_assert_eq!(first, random);
        prop_assert_eq!(tps(&Valuation::additive(values), n).unwrap(), first);
    }

    #[test]
    fn truncation_leaves_nothing_over_proportional(values in additive(12, 1000), n in 1usize..=6) {
        let w = truncate_over_proportional(&Valuation::additive(values), n).unwrap();
        let total = w.raw_total();
        prop_assert!(w.values().iter().all(|&x| x as u128 * n as u128 <= total));
    }

    #[test]
    fn envy_chain_and_share_implications(
        rows in prop::collection::vec(prop::collection::vec(0u64..=9, 5), 2..=3),
        m in 1usize..=5,
    ) {
        let n = rows.len();
        let inst = Instance::new(rows.into_iter().map(|r| Valuation::additive(r[..m].to_vec())).collect()).unwrap();
        for alloc in all_allocations(n, m) {
            let efx = passes(&inst, &alloc, FairnessNotion::Efx);
            let ef1 = passes(&inst, &alloc, FairnessNotion::Ef1);
            let prop1 = passes(&inst, &alloc, FairnessNotion::Prop1Strict);
            let mxs = passes(&inst, &alloc, FairnessNotion::Mxs);
            let aprop = passes(&inst, &alloc, FairnessNotion::Aprop);
            for i in 0..n {
                prop_assert!(!efx[i] || ef1[i], "efx without ef1 for agent {} in {:?}", i, alloc);
                prop_assert!(!ef1[i] || prop1[i], "ef1 without prop1 for agent {} in {:?}", i, alloc);
                prop_assert!(!mxs[i] || aprop[i], "mxs without aprop for agent {} in {:?}", i, alloc);
            }
        }
    }

    #[test]
    fn truncated_fairness_transfers(
        rows in prop::collection::vec(prop::collection::vec(prop_oneof![0u64..=4, 20u64..=60], 5), 2..=3),
        m in 1usize..=5,
    ) {
        let n = rows.len();
        let inst = Instance::new(rows.into_iter().map(|r| Valuation::additive(r[..m].to_vec())).collect()).unwrap();
        // These notions depend only on the agent's own valuation, so each
        // agent is judged in an instance of copies of her truncated view.
        let cuts: Vec<Instance> = inst
            .valuations()
            .iter()
            .map(|v| Instance::new(vec![truncate_over_proportional(v, n).unwrap(); n]).unwrap())
            .collect();
        let notions = [FairnessNotion::Prop1Strict, FairnessNotion::Aprop, FairnessNotion::Mxs, FairnessNotion::Mms];
        for alloc in all_allocations(n, m) {
            for notion in notions {
                let on_orig = passes(&inst, &alloc, notion);
                for i in 0..n {
                    let on_cut = passes(&cuts[i], &alloc, notion)[i];
                    prop_assert!(!on_cut || on_orig[i], "{} transfers for agent {} in {:?}", notion.name(), i, alloc);
                }
            }
        }
    }

    #[test]
    fn checkers_are_deterministic(values in additive(8, 20), owner_seed in any::<u64>()) {
        let m = values.len();
        let inst = Instance::new(vec![Valuation::additive(values.clone()), Valuation::additive(values.into_iter().rev().collect())]).unwrap();
        let owner = (0..m).map(|e| ((owner_seed >> (e % 64)) & 1) as usize).collect();
        let alloc = Allocation::new(2, owner).unwrap();
        for notion in [FairnessNotion::Ef1, FairnessNotion::Mms, FairnessNotion::Aprop, FairnessNotion::Eqx] {
            prop_assert_eq!(check(&inst, &alloc, notion).unwrap(), check(&inst, &alloc, notion).unwrap());
        }
    }
}

#[test]
fn binary_maximin_matches_exhaustive_search() {
    for n in 1..=4 {
        for m in 1..=10 {
            for ones in 0..=m {
                let v = Valuation::binary(m, 0..ones);
                assert_eq!(mms_binary(&v, n).unwrap(), mms_exact(&v, n).unwrap().value, "n {n} m {m} ones {ones}");
            }
        }
    }
}
