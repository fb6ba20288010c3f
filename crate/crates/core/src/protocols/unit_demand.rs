//! Unit-demand protocols. Agents act on the binary image of their valuation:
//! an item is valued when it is among the agent's top `n` items.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::cell::Cell;

use rand::Rng;

use super::{
    ask, lowest_diff_bit, malformed, valued_items, Decided, Outcome, ProtocolError, ProtocolId, PublicParams,
    RudSnapshot,
};
use crate::channel::{choice_width, Channel, Crs, Reply};
use crate::model::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TwoAgentVariant {
    /// Both agents name their two valued items.
    Naive,
    /// The first agent names her top item.
    Announce,
    /// A bit position separating the first agent's items, then one bit.
    Bitsplit,
    /// As bitsplit, over random item names with a unary position.
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ef1Variant {
    FirstRoundRr,
    Bundled,
}

pub fn two_agent_ud(inst: &Instance, crs: &Crs, variant: TwoAgentVariant) -> Result<Outcome, ProtocolError> {
    ProtocolId::Ud2(variant).run(inst, crs)
}

pub fn identical_ud_random_queries(inst: &Instance, crs: &Crs) -> Result<Outcome, ProtocolError> {
    ProtocolId::IdenticalUd.run(inst, crs)
}

pub fn ud_mms_deterministic(inst: &Instance, crs: &Crs) -> Result<Outcome, ProtocolError> {
    ProtocolId::UdDet.run(inst, crs)
}

pub fn rud(inst: &Instance, crs: &Crs) -> Result<Outcome, ProtocolError> {
    ProtocolId::Rud.run(inst, crs)
}

pub fn ud_ef1(inst: &Instance, crs: &Crs, variant: Ef1Variant) -> Result<Outcome, ProtocolError> {
    ProtocolId::UdEf1(variant).run(inst, crs)
}

/// Name of every real item under a random injection into `0..2^L`.
fn random_names(crs: &Crs, label: &str, m: usize) -> Vec<usize> {
    let mut names = crs.permutation(label, m.next_power_of_two());
    names.truncate(m);
    names
}

/// Bit position (among `names`) splitting the closest pair of `items`.
fn closest_split(items: &[usize], name: impl Fn(usize) -> usize) -> Option<usize> {
    let mut best = None;
    for (i, &a) in items.iter().enumerate() {
        for &b in &items[i + 1..] {
            let bit = lowest_diff_bit(name(a), name(b));
            best = Some(best.map_or(bit, |x: usize| x.min(bit)));
        }
    }
    best
}

pub(crate) fn referee_two_agent(
    p: &PublicParams,
    crs: &Crs,
    ch: &mut Channel<'_>,
    variant: TwoAgentVariant,
) -> Result<Decided, ProtocolError> {
    let m = p.m;
    let split = |bit: usize, name: &dyn Fn(usize) -> usize, second_gets_one: bool| {
        let owner: Vec<usize> =
            (0..m).map(|e| if (name(e) >> bit & 1 == 1) == second_gets_one { 1 } else { 0 }).collect();
        Decided::from_owner(owner)
    };
    match variant {
        TwoAgentVariant::Naive => {
            let mut pairs = [[0usize; 2]; 2];
            for (agent, pair) in pairs.iter_mut().enumerate() {
                let mut a = ask(ch, agent, "pair", |v| {
                    let d = valued_items(v, 2);
                    Ok(Reply::new().choice(d[0], m).choice(d[1], m))
                })?;
                *pair = [a.choice(m)?, a.choice(m)?];
                a.finish()?;
            }
            let mine = if pairs[0][0] == pairs[1][0] { pairs[0][1] } else { pairs[0][0] };
            Ok(Decided::from_owner((0..m).map(|e| usize::from(e != mine)).collect()))
        }
        TwoAgentVariant::Announce => {
            let mut a = ask(ch, 0, "top", |v| Ok(Reply::new().choice(valued_items(v, 1)[0], m)))?;
            let top = a.choice(m)?;
            a.finish()?;
            Ok(Decided::from_owner((0..m).map(|e| usize::from(e != top)).collect()))
        }
        TwoAgentVariant::Bitsplit => {
            let width = choice_width(m as u128);
            let mut a = ask(ch, 0, "bit", |v| {
                let bit = closest_split(&valued_items(v, 2), |e| e).ok_or("fewer than two items")?;
                Ok(Reply::new().choice(bit, width))
            })?;
            let bit = a.choice(width)?;
            a.finish()?;
            let mut b = ask(ch, 1, "side", |v| Ok(Reply::new().flag(valued_items(v, 1)[0] >> bit & 1 == 1)))?;
            let side = b.flag()?;
            b.finish()?;
            Ok(split(bit, &|e| e, side))
        }
        TwoAgentVariant::Randomized => {
            let names = random_names(crs, "ud2-names", m);
            let mut a = ask(ch, 0, "bit", |v| {
                let bit = closest_split(&valued_items(v, 2), |e| names[e]).ok_or("fewer than two items")?;
                Ok(Reply::new().unary(bit as u64 + 1))
            })?;
            let bit = (a.unary()? - 1) as usize;
            a.finish()?;
            if bit >= usize::BITS as usize {
                return Err(malformed("bit position"));
            }
            let mut b = ask(ch, 1, "side", |v| Ok(Reply::new().flag(names[valued_items(v, 1)[0]] >> bit & 1 == 1)))?;
            let side = b.flag()?;
            b.finish()?;
            Ok(split(bit, &|e| names[e], side))
        }
    }
}

/// Reply classes for the two parts of a query: value 0, 1 or more.
const QUERY_CLASSES: [(u8, u8); 6] = [(0, 2), (2, 0), (1, 1), (1, 2), (2, 1), (2, 2)];

pub(crate) fn referee_identical(p: &PublicParams, crs: &Crs, ch: &mut Channel<'_>) -> Result<Decided, ProtocolError> {
    let n = p.n;
    let cap = 64 * n + 256;
    let mut pending: VecDeque<Vec<usize>> = VecDeque::from([(0..p.m).collect::<Vec<_>>()]);
    let mut bundles: Vec<Vec<usize>> = Vec::new();
    let mut zeros: Vec<usize> = Vec::new();
    let mut queries = 0usize;
    while let Some(set) = pending.pop_front() {
        if queries == cap {
            return Err(ProtocolError::Failure("query budget exhausted"));
        }
        let mut rng = crs.stream_at("query", queries as u64);
        queries += 1;
        let mut parts: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for &e in &set {
            parts[usize::from(rng.gen::<bool>())].push(e);
        }
        let mut a = ask(ch, 0, "query", |v| {
            let valued = valued_items(v, n);
            let class = |part: &Vec<usize>| part.iter().filter(|e| valued.contains(e)).count().min(2) as u8;
            let pair = (class(&parts[0]), class(&parts[1]));
            let idx = QUERY_CLASSES.iter().position(|&c| c == pair).ok_or("queried set has value below 2")?;
            Ok(Reply::new().choice(idx, QUERY_CLASSES.len()))
        })?;
        let (c0, c1) = QUERY_CLASSES[a.choice(QUERY_CLASSES.len())?];
        a.finish()?;
        for (class, part) in [c0, c1].into_iter().zip(parts) {
            match class {
                0 => zeros.extend(part),
                1 => bundles.push(part),
                _ => pending.push_back(part),
            }
        }
    }
    if bundles.len() != n {
        return Err(ProtocolError::Failure("wrong number of unit bundles"));
    }
    bundles[0].extend(zeros);
    let mut d = Decided::from_bundles(p.m, &bundles);
    d.diagnostics.queries = queries;
    Ok(d)
}

fn satisfied_bit(ch: &mut Channel<'_>, agent: usize, n: usize, bundle: &[usize]) -> Result<bool, ProtocolError> {
    let mut a = ask(ch, agent, "satisfied", |v| {
        let valued = valued_items(v, n);
        Ok(Reply::new().flag(bundle.iter().any(|e| valued.contains(e))))
    })?;
    let s = a.flag()?;
    a.finish()?;
    Ok(s)
}

pub(crate) fn referee_det(p: &PublicParams, ch: &mut Channel<'_>) -> Result<Decided, ProtocolError> {
    let (n, m) = (p.n, p.m);
    let mut bundles: Vec<Vec<usize>> = (0..n).map(|i| (i * m / n..(i + 1) * m / n).collect()).collect();
    let mut satisfied = Vec::with_capacity(n);
    for (i, b) in bundles.iter().enumerate() {
        satisfied.push(satisfied_bit(ch, i, n, b)?);
    }
    while let Some(i) = satisfied.iter().position(|&s| !s) {
        let others: Vec<usize> = (0..n).filter(|&j| j != i && !satisfied[j]).collect();
        let happy: Vec<usize> = (0..n).filter(|&j| satisfied[j]).collect();
        let mut a = ask(ch, i, "case", |v| {
            let valued = valued_items(v, n);
            let count = |b: &Vec<usize>| b.iter().filter(|e| valued.contains(e)).count();
            if let Some(pos) = others.iter().position(|&j| count(&bundles[j]) >= 1) {
                return Ok(Reply::new().flag(true).choice(pos, others.len()));
            }
            let pos = happy.iter().position(|&l| count(&bundles[l]) >= 2).ok_or("no bundle to split")?;
            let b = &bundles[happy[pos]];
            let mine: Vec<usize> = (0..b.len()).filter(|&q| valued.contains(&b[q])).collect();
            let bit = closest_split(&mine, |q| q).ok_or("no pair to split")?;
            Ok(Reply::new().flag(false).choice(pos, happy.len()).choice(bit, choice_width(b.len() as u128)))
        })?;
        if a.flag()? {
            let j = others[a.choice(others.len())?];
            a.finish()?;
            bundles.swap(i, j);
            satisfied[i] = true;
            satisfied[j] = satisfied_bit(ch, j, n, &bundles[j])?;
        } else {
            let l = happy[a.choice(happy.len())?];
            let s = bundles[l].len();
            let bit = a.choice(choice_width(s as u128))?;
            a.finish()?;
            let parts: [Vec<usize>; 2] =
                [0, 1].map(|side| (0..s).filter(|q| q >> bit & 1 == side).map(|q| bundles[l][q]).collect());
            let mut b = ask(ch, l, "prefer", |v| {
                let valued = valued_items(v, n);
                Ok(Reply::new().flag(!parts[0].iter().any(|e| valued.contains(e))))
            })?;
            let pref = usize::from(b.flag()?);
            b.finish()?;
            let [p0, p1] = parts;
            let (keep, give) = if pref == 0 { (p0, p1) } else { (p1, p0) };
            let old = core::mem::take(&mut bundles[i]);
            let moved = give.len().min(old.len());
            let mut lb = keep;
            lb.extend_from_slice(&old[..moved]);
            let mut ib = give;
            ib.extend_from_slice(&old[moved..]);
            bundles[l] = lb;
            bundles[i] = ib;
            satisfied[i] = true;
        }
    }
    Ok(Decided::from_bundles(m, &bundles))
}

pub(crate) fn referee_rud(p: &PublicParams, crs: &Crs, ch: &mut Channel<'_>) -> Result<Decided, ProtocolError> {
    let (n, m) = (p.n, p.m);
    let mut rng = crs.stream("rud-partition");
    let mut bundles: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for e in 0..m {
        bundles[rng.gen_range(0..n)].push(e);
    }
    let names = random_names(crs, "rud-names", m);
    let mut holder: Vec<Option<usize>> = (0..n).map(Some).collect();
    let mut held: Vec<usize> = (0..n).collect();
    let mut satisfied = Vec::with_capacity(n);
    for (i, b) in bundles.iter().enumerate() {
        satisfied.push(satisfied_bit(ch, i, n, b)?);
    }
    let mut snapshots = Vec::new();
    let mut turn = 0u64;
    while let Some(i) = satisfied.iter().position(|&s| !s) {
        let unsatisfied = satisfied.iter().filter(|&&s| !s).count();
        // A fresh order each turn, so earlier turns cannot bias later ranks.
        let keys = crs.permutation_at("rud-order", turn, 2 * n);
        turn += 1;
        let mut order: Vec<usize> = (0..bundles.len()).filter(|&b| b != held[i] && !bundles[b].is_empty()).collect();
        order.sort_by_key(|&b| keys[b]);
        let eligible_seen = Cell::new(None);
        let mut a = ask(ch, i, "bundle", |v| {
            let valued = valued_items(v, n);
            let count = |b: usize| bundles[b].iter().filter(|e| valued.contains(e)).count();
            let eligible = |b: usize| match holder[b] {
                None => count(b) >= 1,
                Some(j) if !satisfied[j] => count(b) >= 1,
                Some(_) => count(b) >= 2,
            };
            eligible_seen.set(Some(order.iter().filter(|&&b| eligible(b)).count()));
            let rank = order.iter().position(|&b| eligible(b)).ok_or("no eligible bundle")?;
            let mut r = Reply::new().uint(rank as u64);
            let b = order[rank];
            if matches!(holder[b], Some(j) if satisfied[j]) {
                let mine: Vec<usize> = bundles[b].iter().copied().filter(|e| valued.contains(e)).collect();
                let bit = closest_split(&mine, |e| names[e]).ok_or("no pair to split")?;
                r = r.unary(bit as u64 + 1);
            }
            Ok(r)
        })?;
        let rank = a.uint()? as usize;
        let b = *order.get(rank).ok_or(malformed("bundle rank"))?;
        snapshots.push(RudSnapshot { unsatisfied, eligible: eligible_seen.get(), rank });
        let old = held[i];
        match holder[b] {
            None => {
                a.finish()?;
                holder[old] = None;
                holder[b] = Some(i);
                held[i] = b;
            }
            Some(j) if !satisfied[j] => {
                a.finish()?;
                holder[old] = Some(j);
                held[j] = old;
                holder[b] = Some(i);
                held[i] = b;
                satisfied[j] = satisfied_bit(ch, j, n, &bundles[old])?;
            }
            Some(l) => {
                let bit = (a.unary()? - 1) as usize;
                a.finish()?;
                if bit >= usize::BITS as usize {
                    return Err(malformed("bit position"));
                }
                let parts: [Vec<usize>; 2] =
                    [0, 1].map(|side| bundles[b].iter().copied().filter(|&e| names[e] >> bit & 1 == side).collect());
                let mut c = ask(ch, l, "prefer", |v| {
                    let valued = valued_items(v, n);
                    Ok(Reply::new().flag(!parts[0].iter().any(|e| valued.contains(e))))
                })?;
                let pref = usize::from(c.flag()?);
                c.finish()?;
                let [p0, p1] = parts;
                let (keep, give) = if pref == 0 { (p0, p1) } else { (p1, p0) };
                if bundles.len() == 2 * n {
                    return Err(ProtocolError::Failure("bundle ids exhausted"));
                }
                bundles[b] = keep;
                bundles.push(give);
                holder.push(Some(i));
                holder[old] = None;
                held[i] = bundles.len() - 1;
            }
        }
        satisfied[i] = true;
    }
    let mut owner = alloc::vec![0usize; m];
    for (b, items) in bundles.iter().enumerate() {
        for &e in items {
            owner[e] = holder[b].unwrap_or(0);
        }
    }
    let mut d = Decided::from_owner(owner);
    d.diagnostics.rud = snapshots;
    Ok(d)
}

/// Bundle count of the bundled EF1 protocol.
fn ef1_bundle_count(n: usize) -> usize {
    n * n * n
}

const EF1_ATTEMPT_CAP: usize = 256;

pub(crate) fn referee_ef1(
    p: &PublicParams,
    crs: &Crs,
    ch: &mut Channel<'_>,
    variant: Ef1Variant,
) -> Result<Decided, ProtocolError> {
    let (n, m) = (p.n, p.m);
    let k = ef1_bundle_count(n);
    let (groups, attempts): (Vec<Vec<usize>>, usize) = if variant == Ef1Variant::Bundled && m > k {
        let mut attempt = 0;
        loop {
            if attempt == EF1_ATTEMPT_CAP {
                return Err(ProtocolError::Failure("no separating bundling found"));
            }
            let mut rng = crs.stream_at("ef1-bundles", attempt as u64);
            attempt += 1;
            let of: Vec<usize> = (0..m).map(|_| rng.gen_range(0..k)).collect();
            let mut all_good = true;
            for i in 0..n {
                let mut a = ask(ch, i, "separated", |v| {
                    let mut seen: Vec<usize> = valued_items(v, n).iter().map(|&e| of[e]).collect();
                    seen.sort_unstable();
                    seen.dedup();
                    Ok(Reply::new().flag(seen.len() == n.min(m)))
                })?;
                all_good &= a.flag()?;
                a.finish()?;
            }
            if all_good {
                let mut groups = alloc::vec![Vec::new(); k];
                for (e, &g) in of.iter().enumerate() {
                    groups[g].push(e);
                }
                break (groups, attempt);
            }
        }
    } else {
        ((0..m).map(|e| alloc::vec![e]).collect(), 0)
    };
    let mut remaining: Vec<usize> = (0..groups.len()).collect();
    let mut bundles: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for (i, bundle) in bundles.iter_mut().enumerate().take(n - 1) {
        if remaining.is_empty() {
            break;
        }
        let mut a = ask(ch, i, "pick", |v| {
            let worth = |g: usize| groups[g].iter().map(|&e| v.item(e)).max().unwrap_or(0);
            let best = (0..remaining.len()).max_by_key(|&q| (worth(remaining[q]), core::cmp::Reverse(q)));
            Ok(Reply::new().choice(best.ok_or("nothing to pick")?, remaining.len()))
        })?;
        let q = a.choice(remaining.len())?;
        a.finish()?;
        bundle.extend_from_slice(&groups[remaining.remove(q)]);
    }
    for g in remaining {
        bundles[n - 1].extend_from_slice(&groups[g]);
    }
    let mut d = Decided::from_bundles(m, &bundles);
    d.diagnostics.attempts = attempts;
    Ok(d)
}
