use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;

use super::ShareError;
use crate::model::{Valuation, ValuationKind, Value};

/// Largest `m` for which the subset-DP maximin oracle runs.
pub const MMS_CAP_M: usize = 14;
/// Largest `m` for the two-agent meet-in-the-middle maximin oracle.
pub const MMS_TWO_AGENT_CAP_M: usize = 30;
/// Largest `m` for the minimum EFX share oracle.
pub const MXS_CAP_M: usize = 14;

fn require_additive(v: &Valuation) -> Result<(), ShareError> {
    if v.kind().is_additive() {
        Ok(())
    } else {
        Err(ShareError::WrongKind { expected: "additive", got: v.kind().name() })
    }
}

pub fn prop_share(v: &Valuation, n: usize) -> Result<Value, ShareError> {
    require_additive(v)?;
    if n == 0 {
        return Err(ShareError::ZeroAgents);
    }
    Ok(Value::new(v.raw_total(), n as u128 * v.scale() as u128))
}

/// Truncated proportional share as `(remaining total numerator, remaining
/// agents)`; the share is `total / (agents * scale)`, or 0 with no agents left.
pub fn tps_raw(v: &Valuation, n: usize) -> Result<(u128, usize), ShareError> {
    require_additive(v)?;
    if n == 0 {
        return Err(ShareError::ZeroAgents);
    }
    let mut sorted: Vec<u64> = v.values().to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut total = v.raw_total();
    let mut k = n;
    for &x in &sorted {
        if k == 0 || (x as u128) * (k as u128) <= total {
            break;
        }
        total -= x as u128;
        k -= 1;
    }
    if k == 0 {
        total = 0;
    }
    Ok((total, k))
}

pub fn tps(v: &Valuation, n: usize) -> Result<Value, ShareError> {
    let (total, k) = tps_raw(v, n)?;
    if k == 0 {
        return Ok(Value::from_integer(0));
    }
    Ok(Value::new(total, k as u128 * v.scale() as u128))
}

/// Cap every over-proportional item at the truncated proportional share.
/// The result is additive over its own (possibly larger) scale and has no
/// item above its proportional share.
pub fn truncate_over_proportional(v: &Valuation, n: usize) -> Result<Valuation, ShareError> {
    let (total, k) = tps_raw(v, n)?;
    if k == n {
        return Ok(v.clone());
    }
    if k == 0 {
        return Ok(Valuation::new(ValuationKind::Additive, vec![0; v.m()], v.scale())?);
    }
    let k128 = k as u128;
    let raw: Vec<u128> =
        v.values().iter().map(|&x| if x as u128 * k128 > total { total } else { x as u128 * k128 }).collect();
    let scale = v.scale() as u128 * k128;
    let g = raw.iter().fold(scale, |g, &x| g.gcd(&x));
    let values = raw
        .iter()
        .map(|&x| u64::try_from(x / g))
        .collect::<Result<Vec<u64>, _>>()
        .map_err(|_| ShareError::Capacity { m: v.m(), n })?;
    let scale = u64::try_from(scale / g).map_err(|_| ShareError::Capacity { m: v.m(), n })?;
    Ok(Valuation::new(ValuationKind::Additive, values, scale)?)
}

/// Maximin share with one witness partition into `n` bundles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmsResult {
    pub value: Value,
    pub partition: Vec<Vec<usize>>,
}

/// Closed form for unit demand: the `n`-th largest item value.
pub fn mms_unit_demand(v: &Valuation, n: usize) -> Result<MmsResult, ShareError> {
    if n == 0 {
        return Err(ShareError::ZeroAgents);
    }
    let ranked = v.ranked_items();
    let mut partition: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (pos, &e) in ranked.iter().enumerate() {
        partition[pos.min(n - 1)].push(e);
    }
    let raw = if v.m() >= n { v.item(ranked[n - 1]) as u128 } else { 0 };
    Ok(MmsResult { value: v.to_value(raw), partition })
}

/// `floor(c / n)` for a binary valuation with `c` ones.
pub fn mms_binary(v: &Valuation, n: usize) -> Result<Value, ShareError> {
    if v.kind() != ValuationKind::BinaryAdditive {
        return Err(ShareError::WrongKind { expected: "binary", got: v.kind().name() });
    }
    if n == 0 {
        return Err(ShareError::ZeroAgents);
    }
    Ok(Value::from_integer((v.count_ones() / n) as u128))
}

/// Maximin share of a two-valued agent with `h` high and `m - h` low items.
/// `raw` is a numerator over the valuation scale; `bundles` lists the
/// (high, low) counts of an optimal partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoValuedMms {
    pub raw: u128,
    pub bundles: Vec<(usize, usize)>,
}

fn two_valued_partition(
    t: u128,
    h: usize,
    lows: usize,
    high: u128,
    low: u128,
    n: usize,
) -> Option<Vec<(usize, usize)>> {
    const INF: usize = usize::MAX;
    let need = |a: usize| -> usize {
        let got = a as u128 * high;
        if got >= t {
            0
        } else if low == 0 {
            INF
        } else {
            usize::try_from((t - got).div_ceil(low)).unwrap_or(INF)
        }
    };
    let needs: Vec<usize> = (0..=h).map(need).collect();
    // best[A] = fewest lows for the bundles so far using exactly A highs.
    let mut best = vec![INF; h + 1];
    best[0] = 0;
    let mut parents: Vec<Vec<usize>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut next = vec![INF; h + 1];
        let mut par = vec![0usize; h + 1];
        for (used, &b) in best.iter().enumerate() {
            if b == INF {
                continue;
            }
            for a in 0..=h - used {
                if needs[a] == INF {
                    continue;
                }
                let cand = b.saturating_add(needs[a]);
                if cand < next[used + a] {
                    next[used + a] = cand;
                    par[used + a] = a;
                }
            }
        }
        parents.push(par);
        best = next;
    }
    let (end, _) = best.iter().enumerate().filter(|(_, &b)| b <= lows).min_by_key(|(_, &b)| b)?;
    let mut bundles = vec![(0, 0); n];
    let mut used = end;
    for j in (0..n).rev() {
        let a = parents[j][used];
        bundles[j] = (a, needs[a]);
        used -= a;
    }
    let (ha, lb) = bundles.iter().fold((0, 0), |(x, y), &(a, b)| (x + a, y + b));
    bundles[n - 1].0 += h - ha;
    bundles[n - 1].1 += lows - lb;
    Some(bundles)
}

pub fn mms_two_valued_counts(h: usize, m: usize, high: u64, low: u64, n: usize) -> Result<TwoValuedMms, ShareError> {
    if n == 0 {
        return Err(ShareError::ZeroAgents);
    }
    let lows = m - h;
    let (hi, lo) = (high as u128, low as u128);
    let mut cands: Vec<u128> = Vec::with_capacity((h + 1) * (lows + 1));
    for a in 0..=h {
        for b in 0..=lows {
            cands.push(a as u128 * hi + b as u128 * lo);
        }
    }
    cands.sort_unstable();
    cands.dedup();
    // Largest feasible threshold; cands[0] = 0 is always feasible.
    let (mut ok, mut bad) = (0usize, cands.len());
    let mut witness = two_valued_partition(0, h, lows, hi, lo, n).expect("zero threshold");
    while bad - ok > 1 {
        let mid = (ok + bad) / 2;
        match two_valued_partition(cands[mid], h, lows, hi, lo, n) {
            Some(w) => {
                ok = mid;
                witness = w;
            }
            None => bad = mid,
        }
    }
    Ok(TwoValuedMms { raw: cands[ok], bundles: witness })
}

/// Bundle values of every subset of items, indexed by bitmask.
fn subset_values(v: &Valuation) -> Vec<u128> {
    let m = v.m();
    let ud = v.kind() == ValuationKind::UnitDemand;
    let mut val = vec![0u128; 1 << m];
    for s in 1usize..(1 << m) {
        let e = s.trailing_zeros() as usize;
        let x = v.item(e) as u128;
        let rest = val[s & (s - 1)];
        val[s] = if ud { rest.max(x) } else { rest + x };
    }
    val
}

fn mask_items(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|&e| mask >> e & 1 == 1).collect()
}

/// Exact maximin share by exhaustive search, with a witness partition.
pub fn mms_exact(v: &Valuation, n: usize) -> Result<MmsResult, ShareError> {
    let m = v.m();
    if n == 0 {
        return Err(ShareError::ZeroAgents);
    }
    if v.kind() == ValuationKind::UnitDemand {
        return mms_unit_demand(v, n);
    }
    if n == 1 {
        return Ok(MmsResult { value: v.to_value(v.raw_total()), partition: vec![(0..m).collect()] });
    }
    if n > m {
        let mut partition: Vec<Vec<usize>> = (0..m).map(|e| vec![e]).collect();
        partition.resize(n, Vec::new());
        return Ok(MmsResult { value: Value::from_integer(0), partition });
    }
    if m <= MMS_CAP_M {
        return Ok(mms_subset_dp(v, n));
    }
    if n == 2 && m <= MMS_TWO_AGENT_CAP_M {
        return Ok(mms_two_agents(v));
    }
    Err(ShareError::Capacity { m, n })
}

fn mms_subset_dp(v: &Valuation, n: usize) -> MmsResult {
    let m = v.m();
    let full = (1usize << m) - 1;
    let val = subset_values(v);
    let mut f = val.clone();
    let mut choices: Vec<Vec<u32>> = Vec::with_capacity(n - 1);
    for _ in 2..=n {
        let mut g = vec![0u128; full + 1];
        let mut ch = vec![0u32; full + 1];
        for s in 1..=full {
            let low = s & s.wrapping_neg();
            let rest = s ^ low;
            let (mut best, mut arg) = (0u128, s);
            let mut sub = rest;
            loop {
                let t = sub | low;
                let cand = val[t].min(f[s ^ t]);
                if cand > best {
                    best = cand;
                    arg = t;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            g[s] = best;
            ch[s] = arg as u32;
        }
        choices.push(ch);
        f = g;
    }
    let mut partition = Vec::with_capacity(n);
    let mut s = full;
    for ch in choices.iter().rev() {
        let t = ch[s] as usize;
        partition.push(mask_items(t & s));
        s &= !t;
    }
    partition.push(mask_items(s));
    MmsResult { value: v.to_value(f[full]), partition }
}

fn mms_two_agents(v: &Valuation) -> MmsResult {
    let m = v.m();
    let half = m / 2;
    let sums = |lo: usize, hi: usize| -> Vec<(u128, usize)> {
        let k = hi - lo;
        let mut out = vec![(0u128, 0usize); 1 << k];
        for s in 1usize..(1 << k) {
            let e = s.trailing_zeros() as usize;
            out[s] = (out[s & (s - 1)].0 + v.item(lo + e) as u128, s);
        }
        out
    };
    let left = sums(0, half);
    let mut right = sums(half, m);
    right.sort_unstable();
    let target = v.raw_total() / 2;
    let (mut best, mut arg) = (0u128, (0usize, 0usize));
    for &(a, la) in &left {
        if a > target {
            continue;
        }
        let idx = right.partition_point(|&(b, _)| a + b <= target);
        if idx > 0 {
            let (b, rb) = right[idx - 1];
            if a + b >= best {
                best = a + b;
                arg = (la, rb);
            }
        }
    }
    let first: Vec<usize> =
        mask_items(arg.0).into_iter().chain(mask_items(arg.1).into_iter().map(|e| e + half)).collect();
    let second: Vec<usize> = (0..m).filter(|e| !first.contains(e)).collect();
    MmsResult { value: v.to_value(best), partition: vec![first, second] }
}

/// Maximin share through the class-specific oracle (closed forms for unit
/// demand, binary and two-valued valuations, exhaustive search otherwise).
pub fn mms_share(v: &Valuation, n: usize) -> Result<Value, ShareError> {
    match v.kind() {
        ValuationKind::UnitDemand => Ok(mms_unit_demand(v, n)?.value),
        ValuationKind::BinaryAdditive => mms_binary(v, n),
        ValuationKind::TwoValued { high, low } => {
            Ok(v.to_value(mms_two_valued_counts(v.count_high(), v.m(), high, low, n)?.raw))
        }
        ValuationKind::Additive => Ok(mms_exact(v, n)?.value),
    }
}

/// Minimum EFX share: the least value of an own bundle `T` such that the
/// remaining items split into `n - 1` bundles none of which is envied after
/// removing any single item.
pub fn mxs_exact(v: &Valuation, n: usize) -> Result<Value, ShareError> {
    let m = v.m();
    if n == 0 {
        return Err(ShareError::ZeroAgents);
    }
    if n == 1 {
        return Ok(v.to_value(v.raw_total()));
    }
    if m > MXS_CAP_M {
        return Err(ShareError::Capacity { m, n });
    }
    let full = (1usize << m) - 1;
    let val = subset_values(v);
    let mut threat = vec![0u128; full + 1];
    for s in 1..=full {
        let mut rest = s;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            threat[s] = threat[s].max(val[s ^ bit]);
            rest ^= bit;
        }
    }
    let mut h = threat.clone();
    for _ in 2..n {
        let mut g = vec![0u128; full + 1];
        for s in 1..=full {
            let low = s & s.wrapping_neg();
            let rest = s ^ low;
            let mut best = u128::MAX;
            let mut sub = rest;
            loop {
                let t = sub | low;
                best = best.min(threat[t].max(h[s ^ t]));
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            g[s] = best;
        }
        h = g;
    }
    let raw = (0..=full)
        .filter(|&t| h[full ^ t] <= val[t])
        .map(|t| val[t])
        .min()
        .expect("the grand bundle is always acceptable");
    Ok(v.to_value(raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn add(v: &[u64]) -> Valuation {
        Valuation::additive(v.to_vec())
    }

    fn int(x: u128) -> Value {
        Value::from_integer(x)
    }

    #[test]
    fn prop_examples() {
        assert_eq!(prop_share(&add(&[3, 7, 2]), 3).unwrap(), int(4));
        assert_eq!(prop_share(&add(&[]), 2).unwrap(), int(0));
        assert_eq!(prop_share(&Valuation::binary(6, 0..6), 3).unwrap(), int(2));
        assert!(prop_share(&Valuation::unit_demand(vec![1]), 1).is_err());
    }

    #[test]
    fn tps_examples() {
        assert_eq!(tps(&add(&[1; 5]), 3).unwrap(), Value::new(5, 3));
        assert_eq!(Value::new(3, 5) * tps(&add(&[1; 5]), 3).unwrap(), int(1));
        assert_eq!(tps(&add(&[10, 1, 1]), 2).unwrap(), int(2));
        assert_eq!(tps(&add(&[5, 5]), 3).unwrap(), int(0));
        assert_eq!(tps(&add(&[1]), 0), Err(ShareError::ZeroAgents));
    }

    #[test]
    fn truncate_examples() {
        let t = truncate_over_proportional(&add(&[10, 1, 1]), 2).unwrap();
        assert_eq!(t.values(), &[2, 1, 1]);
        assert_eq!(t.scale(), 1);
        let same = add(&[3, 2, 2]);
        assert_eq!(truncate_over_proportional(&same, 2).unwrap(), same);
        let one = add(&[100, 1]);
        assert_eq!(truncate_over_proportional(&one, 1).unwrap(), one);
        // Removing 9 leaves a total of 4 (or 5) over two agents.
        let f = truncate_over_proportional(&add(&[9, 2, 1, 1]), 3).unwrap();
        assert_eq!(f.values(), &[2, 2, 1, 1]);
        let g = truncate_over_proportional(&add(&[9, 2, 1, 2]), 3).unwrap();
        assert_eq!((g.values(), g.scale()), (&[5u64, 4, 2, 4][..], 2));
    }

    #[test]
    fn mms_examples() {
        assert_eq!(mms_exact(&add(&[3, 3, 1, 1, 1]), 3).unwrap().value, int(3));
        assert_eq!(mms_exact(&add(&[10, 1, 1]), 2).unwrap().value, int(2));
        assert_eq!(mms_exact(&add(&[4, 5, 6]), 1).unwrap().value, int(15));
        assert_eq!(mms_binary(&Valuation::binary(10, 0..7), 3).unwrap(), int(2));
        assert_eq!(mms_binary(&Valuation::binary(4, []), 3).unwrap(), int(0));
        assert!(mms_binary(&add(&[1]), 1).is_err());
    }

    #[test]
    fn mms_witness_is_partition_achieving_value() {
        let v = add(&[7, 3, 5, 2, 2, 9, 1, 4]);
        let r = mms_exact(&v, 3).unwrap();
        let mut all: Vec<usize> = r.partition.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..8).collect::<Vec<_>>());
        let worst = r.partition.iter().map(|b| v.value_of(b).unwrap()).min().unwrap();
        assert_eq!(worst, r.value);
        assert_eq!(r.value, int(11));
    }

    #[test]
    fn two_agent_meet_in_middle_agrees_with_dp() {
        let v = add(&[13, 2, 8, 21, 5, 5, 1, 34, 3, 9, 11, 6]);
        let dp = mms_subset_dp(&v, 2);
        let mim = mms_two_agents(&v);
        assert_eq!(dp.value, mim.value);
        assert_eq!(mim.partition.iter().map(|b| v.value_of(b).unwrap()).min().unwrap(), mim.value);
        let big = add(&(1..=20).collect::<Vec<u64>>());
        assert_eq!(mms_exact(&big, 2).unwrap().value, int(105));
        assert!(mms_exact(&add(&[1; 16]), 3).is_err());
    }

    #[test]
    fn two_valued_hard_instance() {
        // 5 large items worth 5 and 5 small worth 1 at scale 5.
        let r = mms_two_valued_counts(5, 10, 5, 1, 2).unwrap();
        assert_eq!(r.raw, 15);
        let tv = ValuationKind::TwoValued { high: 5, low: 1 };
        let v = Valuation::new(tv, vec![5, 5, 5, 5, 5, 1, 1, 1, 1, 1], 5).unwrap();
        assert_eq!(mms_exact(&v, 2).unwrap().value, int(3));
        assert_eq!(mms_share(&v, 2).unwrap(), int(3));
    }

    #[test]
    fn identical_additive_hard_mms() {
        let v = add(&[15, 257, 14, 258]);
        let r = mms_exact(&v, 2).unwrap();
        assert_eq!(r.value, int(272));
        let mut pairs: Vec<Vec<usize>> = r.partition.clone();
        for p in &mut pairs {
            p.sort_unstable();
        }
        pairs.sort();
        assert_eq!(pairs, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn mxs_examples() {
        assert_eq!(mxs_exact(&add(&[1, 1, 1]), 2).unwrap(), int(1));
        assert_eq!(mxs_exact(&add(&[1, 0]), 2).unwrap(), int(0));
        assert_eq!(mxs_exact(&add(&[2, 9]), 1).unwrap(), int(11));
    }

    #[test]
    fn ud_mms_is_nth_largest() {
        let v = Valuation::unit_demand(vec![4, 8, 1, 6]);
        assert_eq!(mms_exact(&v, 2).unwrap().value, int(6));
        assert_eq!(mms_exact(&v, 5).unwrap().value, int(0));
    }
}
