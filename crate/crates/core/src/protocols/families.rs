//! Desk-scale instances inside each protocol's precondition set, small
//! enough for the exact checkers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Ef1Variant, ProtocolId};
use crate::model::{gen_instance, Family, Instance, ModelError};

/// Draw `(family, n, m)` for `id` from `seed`, then generate the instance.
pub fn precondition_instance(id: ProtocolId, seed: u64) -> Result<Instance, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
    let (family, n, m) = sample_shape(id, &mut rng);
    gen_instance(family, n, m, rng.gen())
}

fn ud_family(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Family {
    match rng.gen_range(0..3) {
        0 => Family::UdTopN,
        1 => Family::Ef1Hard { k: rng.gen_range(1..=m) },
        _ => Family::BinaryRandom { k: rng.gen_range(0..=(m / n).min(1)) },
    }
}

fn additive_family(rng: &mut ChaCha8Rng) -> Family {
    if rng.gen_bool(0.5) {
        Family::UniformAdditive { max_value: rng.gen_range(1..=30) }
    } else {
        Family::HeavyTailAdditive
    }
}

fn sample_shape(id: ProtocolId, rng: &mut ChaCha8Rng) -> (Family, usize, usize) {
    use ProtocolId::*;
    match id {
        Ud2(_) => {
            let m = rng.gen_range(2..=64);
            let family = if rng.gen_bool(0.5) { Family::UdTopN } else { Family::Ef1Hard { k: rng.gen_range(2..=m) } };
            (family, 2, m)
        }
        IdenticalUd => {
            let n = rng.gen_range(2..=8);
            (Family::IdenticalUd, n, rng.gen_range(n..=4 * n))
        }
        UdDet | Rud => {
            let n = rng.gen_range(2..=8);
            let m = rng.gen_range(2 * n..=4 * n);
            (ud_family(rng, n, m), n, m)
        }
        UdEf1(Ef1Variant::FirstRoundRr) => {
            let n = rng.gen_range(2..=6);
            let family = if rng.gen_bool(0.5) { Family::UdTopN } else { Family::ef1_hard_default(30) };
            (family, n, rng.gen_range(30..=40))
        }
        UdEf1(Ef1Variant::Bundled) => {
            let n = rng.gen_range(2..=3);
            (Family::UdTopN, n, n * n * n + rng.gen_range(1..=30))
        }
        Binary3p => {
            let n = rng.gen_range(2..=8);
            let m = rng.gen_range(n..=40);
            let family = if m >= 2 * n && rng.gen_bool(0.3) {
                Family::BinaryBalanced { k: rng.gen_range(1..=m / (2 * n)) }
            } else {
                Family::BinaryRandom { k: rng.gen_range(0..=m / n) }
            };
            (family, n, m)
        }
        TwoValued => {
            let n = rng.gen_range(2..=4);
            let high = rng.gen_range(2..=6);
            (Family::TwoValuedRandom { high, low: rng.gen_range(0..high) }, n, rng.gen_range(n..=14))
        }
        Prop1(_) | Tps2p | Aprop(_) | RoundRobin => {
            let n = rng.gen_range(1..=8);
            (additive_family(rng), n, rng.gen_range(1..=40))
        }
        TpsBundling(count) => {
            let n = rng.gen_range(2..=3);
            let floor = count.unwrap_or(0).min(256);
            (Family::UniformAdditive { max_value: 20 }, n, floor + rng.gen_range(1..=32))
        }
        CutChoose => (additive_family(rng), 2, rng.gen_range(1..=12)),
    }
}
