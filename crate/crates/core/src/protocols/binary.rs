//! Three-phase maximin protocol for binary valuations.
//!
//! Items are padded with zero items to a multiple of `n` and laid out in a
//! random order. Agent `i` targets `k_i = floor(c_i / n)` one-valued items,
//! where `c_i` is her number of one-valued items. In phase 2 agents, in
//! increasing order of `k_i`, take minimal prefixes of the remaining line.
//! Agents for which that fails ("sad" agents) are served in phase 3 from the
//! leftover or by making a donor keep only `k_j` of her items.

use alloc::vec::Vec;

use super::{ask, malformed, Decided, Outcome, ProtocolError, ProtocolId, PublicParams};
use crate::channel::{Channel, Crs, Reply};
use crate::model::{Instance, Valuation};

pub fn binary_mms_threephase(inst: &Instance, crs: &Crs) -> Result<Outcome, ProtocolError> {
    ProtocolId::Binary3p.run(inst, crs)
}

fn is_one(v: &Valuation, e: usize) -> bool {
    e < v.m() && v.item(e) == v.scale()
}

fn count_ones(v: &Valuation, items: &[usize]) -> usize {
    items.iter().filter(|&&e| is_one(v, e)).count()
}

pub(crate) fn referee(p: &PublicParams, crs: &Crs, ch: &mut Channel<'_>) -> Result<Decided, ProtocolError> {
    let n = p.n;
    let padded = p.m.div_ceil(n) * n;
    let per = padded / n;
    let line = crs.permutation("binary-order", padded);

    let mut targets = Vec::with_capacity(n);
    for i in 0..n {
        let mut a = ask(ch, i, "target", |v| Ok(Reply::new().choice(v.count_ones() / n, per + 1)))?;
        targets.push(a.choice(per + 1)?);
        a.finish()?;
    }
    let mut active: Vec<usize> = (0..n).filter(|&i| targets[i] > 0).collect();
    active.sort_by_key(|&i| (targets[i], i));

    let mut main: Vec<Option<Vec<usize>>> = alloc::vec![None; n];
    let mut starts = alloc::vec![None; n];
    let mut lens = alloc::vec![None; n];
    let mut sad = Vec::new();
    let mut pos = 0;
    for &i in &active {
        if !sad.is_empty() || pos == padded {
            sad.push(i);
            continue;
        }
        let k = targets[i];
        let rest = &line[pos..];
        let mut a = ask(ch, i, "prefix", |v| {
            let mut seen = 0;
            let last = rest.iter().position(|&e| {
                seen += usize::from(is_one(v, e));
                seen == k
            });
            // Prefix length t is sent as t - k + 1; zero reports failure.
            Ok(Reply::new().uint(last.map_or(0, |q| (q + 2 - k) as u64)))
        })?;
        let x = a.uint()? as usize;
        a.finish()?;
        if x == 0 {
            sad.push(i);
            continue;
        }
        let t = x - 1 + k;
        if t > rest.len() {
            return Err(malformed("prefix length"));
        }
        main[i] = Some(rest[..t].to_vec());
        starts[i] = Some(pos);
        lens[i] = Some(t);
        pos += t;
    }
    let mut leftover: Vec<usize> = line[pos..].to_vec();
    let mut diagnostics = super::RunDiagnostics {
        sad: Some(sad.len()),
        targets: targets.clone(),
        prefix_starts: starts,
        prefix_lens: lens,
        main_sets: main.iter().map(|s| s.clone().unwrap_or_default()).collect(),
        leftover: leftover.clone(),
        ..Default::default()
    };

    let mut got: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for &i in &sad {
        let k = targets[i];
        while got[i].len() < k {
            let donors: Vec<usize> =
                active.iter().copied().filter(|&j| main[j].as_ref().is_some_and(|s| s.len() > targets[j])).collect();
            let mut a = ask(ch, i, "pull", |v| {
                if let Some(q) = leftover.iter().position(|&e| is_one(v, e)) {
                    return Ok(Reply::new().flag(true).choice(q, leftover.len()));
                }
                let d = donors
                    .iter()
                    .position(|&j| count_ones(v, main[j].as_deref().unwrap_or_default()) > k)
                    .ok_or("no donor")?;
                Ok(Reply::new().flag(false).choice(d, donors.len()))
            })?;
            if a.flag()? {
                let q = a.choice(leftover.len())?;
                a.finish()?;
                got[i].push(leftover.remove(q));
                continue;
            }
            let j = donors[a.choice(donors.len())?];
            a.finish()?;
            let set = main[j].take().expect("donors hold main sets");
            let kj = targets[j];
            let mut b = ask(ch, j, "keep", |v| {
                let mine: Vec<usize> = (0..set.len()).filter(|&q| is_one(v, set[q])).take(kj).collect();
                if mine.len() < kj {
                    return Err("donor lacks her own items");
                }
                Ok(Reply::new().subset(&mine, set.len()))
            })?;
            let keep = b.subset(set.len(), kj)?;
            b.finish()?;
            let (mut kept, mut released) = (Vec::with_capacity(kj), Vec::new());
            for (q, &e) in set.iter().enumerate() {
                if keep.binary_search(&q).is_ok() {
                    kept.push(e);
                } else {
                    released.push(e);
                }
            }
            main[j] = Some(kept);
            let mut c = ask(ch, i, "take", |v| {
                let q = released.iter().position(|&e| is_one(v, e)).ok_or("donor released nothing useful")?;
                Ok(Reply::new().choice(q, released.len()))
            })?;
            let q = c.choice(released.len())?;
            c.finish()?;
            got[i].push(released.remove(q));
            leftover.extend(released);
        }
    }

    let mut owner = alloc::vec![0usize; padded];
    for (j, set) in main.iter().enumerate() {
        for &e in set.iter().flatten() {
            owner[e] = j;
        }
    }
    for (i, items) in got.iter().enumerate() {
        for &e in items {
            owner[e] = i;
        }
    }
    diagnostics.leftover = leftover;
    let mut d = Decided::from_owner(owner);
    d.diagnostics = diagnostics;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shares::{check, FairnessNotion};
    use alloc::vec;

    #[test]
    fn uniform_all_ones() {
        let n = 4;
        let inst = Instance::new((0..n).map(|_| Valuation::binary(12, 0..12)).collect()).unwrap();
        let out = binary_mms_threephase(&inst, &Crs::new(9)).unwrap();
        assert_eq!(out.diagnostics.sad, Some(0));
        assert!(out.allocation.bundles().iter().all(|b| b.len() == 3));
        assert!(check(&inst, &out.allocation, FairnessNotion::Mms).unwrap().iter().all(|v| v.pass));
    }

    #[test]
    fn sad_agents_are_served() {
        // Agent 2 wants items the others also like; several seeds force phase 3.
        let inst = Instance::new(vec![
            Valuation::binary(9, [0, 1, 2, 3, 4, 5]),
            Valuation::binary(9, [0, 1, 2, 6, 7, 8]),
            Valuation::binary(9, [0, 1, 2, 3, 6, 7]),
        ])
        .unwrap();
        let mut saw_sad = false;
        for seed in 0..200 {
            let out = binary_mms_threephase(&inst, &Crs::new(seed)).unwrap();
            saw_sad |= out.diagnostics.sad.unwrap() > 0;
            assert!(check(&inst, &out.allocation, FairnessNotion::Mms).unwrap().iter().all(|v| v.pass));
            let lens: usize = out.diagnostics.prefix_lens.iter().flatten().sum();
            assert!(lens <= 9);
        }
        assert!(saw_sad);
    }
}
