//! Seeded instance families, including the hard families behind the
//! lower-bound arguments.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instance, ModelError, Valuation, ValuationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Identical binary valuation with exactly `k * n` ones; needs `m >= 2kn`.
    BinaryBalanced { k: usize },
    /// Independent binary valuations; agent `i` has between `kn` and
    /// `(k + 1)n - 1` ones (so its maximin share is `k`).
    BinaryRandom { k: usize },
    /// Identical two-valued valuation with `kn + n - 1` large items of value 1
    /// and the rest worth `1 / (m - m')`; needs `2kn < m <= 2kn + 2n`.
    TwoValuedHard { k: usize },
    /// Independent two-valued valuations, each item high with probability 1/2.
    TwoValuedRandom { high: u64, low: u64 },
    /// Identical additive valuation: for every `j` in `1..=n`, `k - 1` medium
    /// items of value `K - j` and one large item of value `K^2 + (k - 1) j`.
    IdenticalAdditiveHard { k: usize, big_k: u64 },
    /// Unit-demand valuations with exactly `k` items of value 1 each, chosen
    /// independently per agent.
    Ef1Hard { k: usize },
    /// Independent unit-demand valuations: a random ranking of `1..=m`.
    UdTopN,
    /// One random unit-demand ranking shared by every agent.
    IdenticalUd,
    /// Independent additive values uniform in `0..=max_value`.
    UniformAdditive { max_value: u64 },
    /// Independent additive values `floor(2^(20 u))`, `u` uniform: a few items
    /// dominate, so over-proportional items are common.
    HeavyTailAdditive,
}

impl Family {
    /// Default hard-family parameter for the EF1 construction, `k ~ m^(3/4)`.
    pub fn ef1_hard_default(m: usize) -> Family {
        let k = libm::round(libm::pow(m as f64, 0.75)) as usize;
        Family::Ef1Hard { k: k.clamp(1, m) }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::BinaryBalanced { .. } => "binary-balanced",
            Family::BinaryRandom { .. } => "binary-random",
            Family::TwoValuedHard { .. } => "two-valued-hard",
            Family::TwoValuedRandom { .. } => "two-valued-random",
            Family::IdenticalAdditiveHard { .. } => "identical-additive-hard",
            Family::Ef1Hard { .. } => "ef1-hard",
            Family::UdTopN => "ud-top-n",
            Family::IdenticalUd => "identical-ud",
            Family::UniformAdditive { .. } => "uniform-additive",
            Family::HeavyTailAdditive => "heavy-tail-additive",
        }
    }

    fn check_params(&self, n: usize, m: usize) -> Result<(), ModelError> {
        if n == 0 || m == 0 {
            return Err(ModelError::Empty);
        }
        match *self {
            Family::BinaryBalanced { k } => {
                if k == 0 {
                    return Err(ModelError::Infeasible("binary-balanced needs k >= 1"));
                }
                if m < 2 * k * n {
                    return Err(ModelError::Infeasible("binary-balanced needs m >= 2kn"));
                }
            }
            Family::BinaryRandom { k } => {
                if m < k * n {
                    return Err(ModelError::Infeasible("binary-random needs m >= kn"));
                }
            }
            Family::TwoValuedHard { k } => {
                if n < 2 || k == 0 {
                    return Err(ModelError::Infeasible("two-valued-hard needs n >= 2 and k >= 1"));
                }
                if !(2 * k * n < m && m <= 2 * k * n + 2 * n) {
                    return Err(ModelError::Infeasible("two-valued-hard needs 2kn < m <= 2kn + 2n"));
                }
            }
            Family::TwoValuedRandom { high, low } => {
                if high <= low {
                    return Err(ModelError::BadTwoValues { high, low });
                }
            }
            Family::IdenticalAdditiveHard { k, big_k } => {
                if k < 2 {
                    return Err(ModelError::Infeasible("identical-additive-hard needs k >= 2"));
                }
                if m < k * n {
                    return Err(ModelError::Infeasible("identical-additive-hard needs m >= kn"));
                }
                if (big_k as u128) < (m as u128) * (m as u128) {
                    return Err(ModelError::Infeasible("identical-additive-hard needs K >= m^2"));
                }
            }
            Family::Ef1Hard { k } => {
                if k == 0 || k > m {
                    return Err(ModelError::Infeasible("ef1-hard needs 1 <= k <= m"));
                }
            }
            Family::UdTopN | Family::IdenticalUd | Family::UniformAdditive { .. } | Family::HeavyTailAdditive => {}
        }
        Ok(())
    }

    /// Verify the defining invariants of the family on a generated instance.
    pub fn verify(&self, inst: &Instance) -> Result<(), ModelError> {
        let n = inst.n();
        let m = inst.m();
        let bad = |msg| Err(ModelError::Infeasible(msg));
        match *self {
            Family::BinaryBalanced { k } => {
                if !inst.is_identical() || inst.valuation(0).count_ones() != k * n {
                    return bad("binary-balanced instance is not balanced");
                }
            }
            Family::BinaryRandom { k } => {
                for v in inst.valuations() {
                    let c = v.count_ones();
                    if c < k * n || (c >= (k + 1) * n && c != m) {
                        return bad("binary-random count out of range");
                    }
                }
            }
            Family::TwoValuedHard { k } => {
                let large = k * n + n - 1;
                if !inst.is_identical() || inst.valuation(0).count_high() != large {
                    return bad("two-valued-hard has the wrong number of large items");
                }
            }
            Family::IdenticalAdditiveHard { k, big_k } => {
                let mut vals: Vec<u64> = inst.valuation(0).values().to_vec();
                vals.sort_unstable();
                let mut want: Vec<u64> = Vec::with_capacity(m);
                for j in 1..=n as u64 {
                    want.extend(core::iter::repeat_n(big_k - j, k - 1));
                    want.push(big_k * big_k + (k as u64 - 1) * j);
                }
                want.extend(core::iter::repeat_n(0, m - k * n));
                want.sort_unstable();
                if !inst.is_identical() || vals != want {
                    return bad("identical-additive-hard values differ from the construction");
                }
            }
            Family::Ef1Hard { k } => {
                if inst.valuations().iter().any(|v| v.count_ones() != k) {
                    return bad("ef1-hard agent without exactly k ones");
                }
            }
            Family::IdenticalUd => {
                if !inst.is_identical() {
                    return bad("identical-ud valuations differ");
                }
            }
            Family::TwoValuedRandom { .. }
            | Family::UdTopN
            | Family::UniformAdditive { .. }
            | Family::HeavyTailAdditive => {}
        }
        Ok(())
    }
}

fn random_ones(rng: &mut ChaCha8Rng, m: usize, count: usize) -> Vec<usize> {
    let mut items: Vec<usize> = (0..m).collect();
    items.shuffle(rng);
    items.truncate(count);
    items
}

fn shuffled(rng: &mut ChaCha8Rng, mut values: Vec<u64>) -> Vec<u64> {
    values.shuffle(rng);
    values
}

/// Generate an instance of `family` with `n` agents and `m` items,
/// deterministically from `seed`.
pub fn gen_instance(family: Family, n: usize, m: usize, seed: u64) -> Result<Instance, ModelError> {
    family.check_params(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let valuations: Vec<Valuation> = match family {
        Family::BinaryBalanced { k } => {
            let v = Valuation::binary(m, random_ones(&mut rng, m, k * n));
            alloc::vec![v; n]
        }
        Family::BinaryRandom { k } => (0..n)
            .map(|_| {
                let hi = ((k + 1) * n - 1).min(m);
                let c = rng.gen_range(k * n..=hi);
                Valuation::binary(m, random_ones(&mut rng, m, c))
            })
            .collect(),
        Family::TwoValuedHard { k } => {
            let large = k * n + n - 1;
            let small = (m - large) as u64;
            let kind = ValuationKind::TwoValued { high: small, low: 1 };
            let mut values = alloc::vec![1u64; m];
            for e in random_ones(&mut rng, m, large) {
                values[e] = small;
            }
            alloc::vec![Valuation::new(kind, values, small)?; n]
        }
        Family::TwoValuedRandom { high, low } => {
            let kind = ValuationKind::TwoValued { high, low };
            (0..n)
                .map(|_| {
                    let values = (0..m).map(|_| if rng.gen_bool(0.5) { high } else { low }).collect();
                    Valuation::new(kind, values, 1)
                })
                .collect::<Result<_, _>>()?
        }
        Family::IdenticalAdditiveHard { k, big_k } => {
            let mut values = Vec::with_capacity(m);
            for j in 1..=n as u64 {
                values.extend(core::iter::repeat_n(big_k - j, k - 1));
                values.push(big_k * big_k + (k as u64 - 1) * j);
            }
            values.resize(m, 0);
            alloc::vec![Valuation::additive(shuffled(&mut rng, values)); n]
        }
        Family::Ef1Hard { k } => (0..n)
            .map(|_| {
                let mut values = alloc::vec![0; m];
                for e in random_ones(&mut rng, m, k) {
                    values[e] = 1;
                }
                Valuation::unit_demand(values)
            })
            .collect(),
        Family::UdTopN => {
            (0..n).map(|_| Valuation::unit_demand(shuffled(&mut rng, (1..=m as u64).collect()))).collect()
        }
        Family::IdenticalUd => {
            let v = Valuation::unit_demand(shuffled(&mut rng, (1..=m as u64).collect()));
            alloc::vec![v; n]
        }
        Family::UniformAdditive { max_value } => {
            (0..n).map(|_| Valuation::additive((0..m).map(|_| rng.gen_range(0..=max_value)).collect())).collect()
        }
        Family::HeavyTailAdditive => (0..n)
            .map(|_| {
                let values = (0..m).map(|_| libm::floor(libm::exp2(20.0 * rng.gen::<f64>())) as u64).collect();
                Valuation::additive(values)
            })
            .collect(),
    };
    let inst = Instance::new(valuations)?;
    family.verify(&inst)?;
    Ok(inst)
}
