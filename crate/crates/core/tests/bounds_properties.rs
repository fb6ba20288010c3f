//! Lower-bound tools against closed-form counts.

use fairbits_core::bounds::{
    all_allocations, cyclic_mms_dc, enumerate_family, estimate_over, estimate_rdc_bound, min_hitting_set, Acceptance,
    Sampling,
};
use fairbits_core::channel::Crs;
use fairbits_core::model::{gen_instance, Allocation, Family};
use fairbits_core::shares::{check, FairnessNotion};
use fairbits_core::Value;
use proptest::prelude::*;

fn binom(n: u128, k: u128) -> u128 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn balanced_binary_probability_is_the_split_count() {
    // The best allocation halves the items; both halves must hold exactly
    // two of the four ones.
    let est = estimate_rdc_bound(
        Family::BinaryBalanced { k: 2 },
        FairnessNotion::Mms.into(),
        2,
        8,
        Sampling::Exhaustive,
        &Crs::new(0),
    )
    .unwrap();
    assert_eq!(est.p_hat, Value::new(binom(4, 2) * binom(4, 2), binom(8, 4)));
    assert_eq!(est.p_hat, Value::new(36, 70));
    assert!((est.bound_bits - (70.0f64 / 36.0).log2()).abs() < 1e-12);
}

#[test]
fn two_valued_hard_probability_is_hypergeometric() {
    // n = 2, k = 2: m' = 5 heavy items among 10; one agent must receive
    // s = (n - 1)(k + 1) = 3 heavy items and nothing else.
    let est = estimate_rdc_bound(
        Family::TwoValuedHard { k: 2 },
        FairnessNotion::Mms.into(),
        2,
        10,
        Sampling::Exhaustive,
        &Crs::new(0),
    )
    .unwrap();
    assert_eq!(est.p_hat, Value::new(binom(5, 3), binom(10, 3)));
    assert_eq!(est.p_hat, Value::new(10, 120));
}

#[test]
fn fixed_allocation_matches_hypergeometric_ratio() {
    let instances = enumerate_family(Family::TwoValuedHard { k: 2 }, 2, 10).unwrap();
    let mut owner = vec![1; 10];
    owner[..3].fill(0);
    let alloc = Allocation::new(2, owner).unwrap();
    let est = estimate_over(&instances, Some(&[alloc]), FairnessNotion::Mms.into(), true).unwrap();
    assert_eq!(est.p_hat, Value::new(binom(5, 3), binom(10, 3)));
}

#[test]
fn distinguished_pair_hitting_set_needs_log_m_allocations() {
    let m = 4;
    let instances = enumerate_family(Family::Ef1Hard { k: 2 }, 2, m).unwrap();
    assert_eq!(instances.len(), 36);
    let h = min_hitting_set(&instances, FairnessNotion::Mms.into(), 1 << 22).unwrap();
    assert!(h.exact);
    // Item names under the hitting set must be distinct: |H| >= log2 m.
    assert!(h.size >= 2, "size {}", h.size);
    println!("distinguished pairs, m = {m}: minimal hitting set has {} allocations", h.size);
    for inst in &instances {
        assert!(h.allocations.iter().any(|a| check(inst, a, FairnessNotion::Mms).unwrap().iter().all(|v| v.pass)));
    }
}

#[test]
fn cyclic_family_hitting_set_is_at_most_n() {
    let instances = enumerate_family(Family::UdTopN, 3, 4).unwrap();
    let h = min_hitting_set(&instances, FairnessNotion::Mms.into(), 1 << 22).unwrap();
    assert!(h.size <= 3);
    for inst in &instances {
        assert!(h.allocations.iter().any(|a| check(inst, a, FairnessNotion::Mms).unwrap().iter().all(|v| v.pass)));
    }
}

#[test]
fn everything_acceptance_needs_one_allocation() {
    let instances = enumerate_family(Family::BinaryBalanced { k: 1 }, 2, 4).unwrap();
    let h = min_hitting_set(&instances, Acceptance::Everything, 10).unwrap();
    assert_eq!((h.size, h.exact), (1, true));
}

#[test]
fn sampled_estimate_covers_exhaustive_value() {
    let est = estimate_rdc_bound(
        Family::BinaryBalanced { k: 2 },
        FairnessNotion::Mms.into(),
        2,
        8,
        Sampling::Sampled { trials: 400 },
        &Crs::new(11),
    )
    .unwrap();
    assert!(est.ci_low <= 36.0 / 70.0 + 0.05 && 36.0 / 70.0 - 0.05 <= est.ci_high);
    assert!(all_allocations(2, 8).unwrap().count() == 256);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cyclic_rotation_always_exists(n in 1usize..=7, seed in any::<u64>()) {
        let inst = gen_instance(Family::UdTopN, n, n + 1, seed).unwrap();
        let found = cyclic_mms_dc(&inst).unwrap();
        prop_assert!((1..=n).contains(&found.rotation));
        prop_assert!(check(&inst, &found.allocation, FairnessNotion::Mms).unwrap().iter().all(|v| v.pass));
    }
}
