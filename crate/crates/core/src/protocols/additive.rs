//! Protocols for additive valuations: truncated proportional share (two
//! phase and random bundling), the semi-contiguous Aprop protocol,
//! cut-and-choose and round robin.
//!
//! Agents work with their valuation truncated at the truncated proportional
//! share, with total `T`. Normalizing so that the total is `n`, a set worth
//! `x` (raw) has value `n x / T`; all threshold tests below are the
//! corresponding integer comparisons.

use alloc::vec::Vec;

use rand::Rng;

use super::median::{decompose, priorities, Leaf};
use super::{
    ask, Decided, MedianVariant, Memo, Outcome, ProtocolError, ProtocolId, PublicParams, SemiContiguousAllocation,
};
use crate::channel::{Channel, Crs, Reply};
use crate::model::{Instance, Valuation};
use crate::shares::{mms_exact, truncate_over_proportional};

pub fn tps_two_phase(inst: &Instance, crs: &Crs) -> Result<Outcome, ProtocolError> {
    ProtocolId::Tps2p.run(inst, crs)
}

pub fn aprop_allocate(inst: &Instance, crs: &Crs, variant: MedianVariant) -> Result<Outcome, ProtocolError> {
    ProtocolId::Aprop(variant).run(inst, crs)
}

/// Random bundling with `bundles` bundles; `None` uses [`default_bundle_count`].
pub fn tps_random_bundling(inst: &Instance, crs: &Crs, bundles: Option<usize>) -> Result<Outcome, ProtocolError> {
    ProtocolId::TpsBundling(bundles).run(inst, crs)
}

pub fn cut_and_choose(inst: &Instance, crs: &Crs) -> Result<Outcome, ProtocolError> {
    ProtocolId::CutChoose.run(inst, crs)
}

pub fn round_robin(inst: &Instance, crs: &Crs) -> Result<Outcome, ProtocolError> {
    ProtocolId::RoundRobin.run(inst, crs)
}

/// `2 n^9`, saturating.
pub fn default_bundle_count(n: usize) -> usize {
    (n as u64)
        .checked_pow(9)
        .and_then(|x| x.checked_mul(2))
        .map_or(usize::MAX, |x| usize::try_from(x).unwrap_or(usize::MAX))
}

/// An agent's truncated values of the units being allocated (items or
/// bundles of items), with the truncated total.
#[derive(Debug, Clone)]
struct View {
    units: Vec<u128>,
    total: u128,
}

fn truncated(v: &Valuation, n: usize) -> Result<Valuation, &'static str> {
    truncate_over_proportional(v, n).map_err(|_| "valuation cannot be truncated")
}

fn item_view(v: &Valuation, n: usize) -> Result<View, &'static str> {
    let t = truncated(v, n)?;
    Ok(View { units: t.values().iter().map(|&x| x as u128).collect(), total: t.raw_total() })
}

fn group_view(v: &Valuation, n: usize, groups: &[Vec<usize>]) -> Result<View, &'static str> {
    let t = truncated(v, n)?;
    Ok(View { units: groups.iter().map(|g| t.raw_value(g.iter().copied())).collect(), total: t.raw_total() })
}

/// `x` reaches `n / (2n - 1)` of the normalized total.
fn meets_rho(x: u128, total: u128, n: usize) -> bool {
    x * (2 * n as u128 - 1) >= total
}

/// Start positions of `parts` greedy bundles along `line`: each bundle takes
/// at least one unit and stops once it reaches the threshold; the last takes
/// the rest.
fn greedy_cuts(w: &View, line: &[usize], parts: usize, n: usize) -> Result<Vec<usize>, &'static str> {
    let mut cuts = alloc::vec![0; parts + 1];
    let mut p = 0;
    for cut in cuts.iter_mut().take(parts).skip(1) {
        let (start, mut acc) = (p, 0u128);
        while p < line.len() && !(p > start && meets_rho(acc, w.total, n)) {
            acc += w.units[line[p]];
            p += 1;
        }
        if !meets_rho(acc, w.total, n) {
            return Err("no threshold bundle can be formed");
        }
        *cut = p;
    }
    cuts[parts] = line.len();
    Ok(cuts)
}

struct TpsSplit {
    grabbed: Vec<Option<usize>>,
    line: Vec<usize>,
    leaves: Vec<Leaf>,
}

/// Phase 1: agents in turn grab the cheapest remaining unit that alone meets
/// the threshold. Phase 2: the others split the remaining line by median
/// decomposition of their greedy threshold partitions.
fn tps_core(
    ch: &mut Channel<'_>,
    crs: &Crs,
    n: usize,
    units: usize,
    view: &dyn Fn(&Valuation) -> Result<View, &'static str>,
) -> Result<TpsSplit, ProtocolError> {
    let memo: Memo<Result<View, &'static str>> = Memo::new(n);
    let with_view = |a: usize, v: &Valuation| memo.with(a, || view(v), |w| w.clone());
    let mut available: Vec<usize> = (0..units).collect();
    let mut grabbed = alloc::vec![None; n];
    for (i, slot) in grabbed.iter_mut().enumerate() {
        let mut a = ask(ch, i, "grab", |v| {
            let w = with_view(i, v)?;
            let pick = (0..available.len())
                .filter(|&q| {
                    let x = w.units[available[q]];
                    x > 0 && meets_rho(x, w.total, n)
                })
                .min_by_key(|&q| (w.units[available[q]], q));
            Ok(match pick {
                Some(q) => Reply::new().flag(true).choice(q, available.len()),
                None => Reply::new().flag(false),
            })
        })?;
        if a.flag()? {
            let q = a.choice(available.len())?;
            *slot = Some(available.remove(q));
        }
        a.finish()?;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| grabbed[i].is_none()).collect();
    let parts = rest.len();
    let cuts: Memo<Result<Vec<usize>, &'static str>> = Memo::new(n);
    let line = available;
    let cut_of = |a: usize, v: &Valuation, j: usize| {
        let c = cuts.with(a, || greedy_cuts(&with_view(a, v)?, &line, parts, n), |c| c.clone())?;
        Ok(c[j])
    };
    let leaves = decompose(ch, MedianVariant::Rand, &priorities(crs, n), rest, line.len(), false, &cut_of)?;
    Ok(TpsSplit { grabbed, line, leaves })
}

fn ranges_of(n: usize, leaves: &[Leaf]) -> Vec<Option<(usize, usize)>> {
    let mut ranges = alloc::vec![None; n];
    for l in leaves {
        ranges[l.agent] = Some((l.lo, l.hi));
    }
    ranges
}

pub(crate) fn referee_tps(p: &PublicParams, crs: &Crs, ch: &mut Channel<'_>) -> Result<Decided, ProtocolError> {
    let n = p.n;
    let split = tps_core(ch, crs, n, p.m, &|v| item_view(v, n))?;
    let holes: Vec<usize> = split.grabbed.iter().flatten().copied().collect();
    let semi =
        SemiContiguousAllocation::from_line(p.m, &split.line, &ranges_of(n, &split.leaves), holes, split.grabbed);
    let mut d = Decided::from_owner(semi.to_allocation()?.owner().to_vec());
    d.semi = Some(semi);
    Ok(d)
}

const BUNDLING_ATTEMPT_CAP: usize = 64;

pub(crate) fn referee_bundling(
    p: &PublicParams,
    crs: &Crs,
    ch: &mut Channel<'_>,
    count: usize,
) -> Result<Decided, ProtocolError> {
    let (n, m) = (p.n, p.m);
    if m <= count {
        return referee_tps(p, crs, ch);
    }
    for attempt in 0..BUNDLING_ATTEMPT_CAP {
        let mut rng = crs.stream_at("tps-bundles", attempt as u64);
        let mut groups = alloc::vec![Vec::new(); count];
        for e in 0..m {
            groups[rng.gen_range(0..count)].push(e);
        }
        let mut unanimous = true;
        for i in 0..n {
            let mut a = ask(ch, i, "good", |v| {
                let w = group_view(v, n, &groups)?;
                // Every bundle is worth at most 2n / (2n - 1) after normalizing.
                Ok(Reply::new().flag(w.units.iter().all(|&x| x * (2 * n as u128 - 1) <= 2 * w.total)))
            })?;
            unanimous &= a.flag()?;
            a.finish()?;
        }
        if !unanimous {
            continue;
        }
        let split = tps_core(ch, crs, n, count, &|v| group_view(v, n, &groups))?;
        let mut owner = alloc::vec![0; m];
        for (i, g) in split.grabbed.iter().enumerate() {
            for &e in g.iter().flat_map(|&g| &groups[g]) {
                owner[e] = i;
            }
        }
        for l in &split.leaves {
            for &g in &split.line[l.lo..l.hi] {
                for &e in &groups[g] {
                    owner[e] = l.agent;
                }
            }
        }
        if split.leaves.is_empty() {
            for &g in &split.line {
                for &e in &groups[g] {
                    owner[e] = 0;
                }
            }
        }
        let mut d = Decided::from_owner(owner);
        d.diagnostics.attempts = attempt + 1;
        return Ok(d);
    }
    Err(ProtocolError::Failure("no unanimously good bundling"))
}

/// Aprop tests on an agent's truncated values (`x` raw, normalized total `n`).
struct AgentAprop<'a> {
    x: &'a [u128],
    total: u128,
    n: usize,
}

impl AgentAprop<'_> {
    fn large(&self, e: usize) -> bool {
        self.x[e] > 0 && meets_rho(self.x[e], self.total, self.n)
    }

    /// `value + x_e > 1` after normalizing.
    fn tops_one(&self, value: u128, e: usize) -> bool {
        self.n as u128 * (value + self.x[e]) > self.total
    }

    fn good(&self, e: usize, ranked: &[usize]) -> bool {
        self.large(e) && ranked.iter().find(|&&f| f != e).is_some_and(|&f| self.tops_one(self.x[e], f))
    }
}

/// Starts (in `non_holes`) of the agent's nested bundles: bundle `j` opens
/// with hole `j` (if any) and takes non-hole items until it is Aprop; the
/// last bundle takes the rest.
fn aprop_cuts(
    w: &View,
    n: usize,
    holes: &[usize],
    non_holes: &[usize],
    parts: usize,
) -> Result<Vec<usize>, &'static str> {
    let t = AgentAprop { x: &w.units, total: w.total, n };
    let mut ranked: Vec<usize> = (0..w.units.len()).collect();
    ranked.sort_by_key(|&e| (core::cmp::Reverse(w.units[e]), e));
    let mut pos_in_line = alloc::vec![usize::MAX; w.units.len()];
    for (q, &e) in non_holes.iter().enumerate() {
        pos_in_line[e] = q;
    }
    let mut cuts = alloc::vec![0; parts + 1];
    let mut p = 0;
    for j in 0..parts.saturating_sub(1) {
        let hole = holes.get(j).copied();
        let start = p;
        let mut acc = hole.map_or(0, |h| w.units[h]);
        let done = |acc: u128, p: usize| {
            // Bundles stay non-empty while the line lasts.
            if p == start && p < non_holes.len() {
                return false;
            }
            if w.total == 0 {
                return true;
            }
            let inside = |e: usize| Some(e) == hole || (start..p).contains(&pos_in_line[e]);
            meets_rho(acc, w.total, n) && ranked.iter().find(|&&e| !inside(e)).is_some_and(|&e| t.tops_one(acc, e))
        };
        while p < non_holes.len() && !done(acc, p) {
            acc += w.units[non_holes[p]];
            p += 1;
        }
        if !done(acc, p) {
            return Err("nested bundle cannot be completed");
        }
        cuts[j + 1] = p;
    }
    cuts[parts] = non_holes.len();
    Ok(cuts)
}

pub(crate) fn referee_aprop(
    p: &PublicParams,
    crs: &Crs,
    ch: &mut Channel<'_>,
    variant: MedianVariant,
) -> Result<Decided, ProtocolError> {
    let (n, m) = (p.n, p.m);
    let memo: Memo<Result<(View, Vec<usize>), &'static str>> = Memo::new(n);
    let agent = |a: usize, v: &Valuation| {
        memo.with(
            a,
            || {
                let w = item_view(v, n)?;
                let mut ranked: Vec<usize> = (0..m).collect();
                ranked.sort_by_key(|&e| (core::cmp::Reverse(w.units[e]), e));
                Ok((w, ranked))
            },
            |r| r.clone(),
        )
    };

    let mut available: Vec<usize> = (0..m).collect();
    let mut grabbed = alloc::vec![None; n];
    for (i, slot) in grabbed.iter_mut().enumerate() {
        let mut a = ask(ch, i, "good", |v| {
            let (w, ranked) = agent(i, v)?;
            let t = AgentAprop { x: &w.units, total: w.total, n };
            let pick = (0..available.len())
                .filter(|&q| t.good(available[q], &ranked))
                .min_by_key(|&q| (w.units[available[q]], q));
            Ok(match pick {
                Some(q) => Reply::new().flag(true).choice(q, available.len()),
                None => Reply::new().flag(false),
            })
        })?;
        if a.flag()? {
            let q = a.choice(available.len())?;
            *slot = Some(available.remove(q));
        }
        a.finish()?;
    }

    let rest: Vec<usize> = (0..n).filter(|&i| grabbed[i].is_none()).collect();
    let mut pool: Vec<usize> = Vec::new();
    for &i in &rest {
        let open: Vec<usize> = available.iter().copied().filter(|e| !pool.contains(e)).collect();
        let mut a = ask(ch, i, "large", |v| {
            let (w, _) = agent(i, v)?;
            let t = AgentAprop { x: &w.units, total: w.total, n };
            Ok(match open.iter().position(|&e| t.large(e)) {
                Some(q) => Reply::new().flag(true).choice(q, open.len()),
                None => Reply::new().flag(false),
            })
        })?;
        if a.flag()? {
            pool.push(open[a.choice(open.len())?]);
        }
        a.finish()?;
    }

    let non_holes: Vec<usize> = available.iter().copied().filter(|e| !pool.contains(e)).collect();
    let parts = rest.len();
    let cuts: Memo<Result<Vec<usize>, &'static str>> = Memo::new(n);
    let cut_of = |a: usize, v: &Valuation, j: usize| {
        let c = cuts.with(a, || aprop_cuts(&agent(a, v)?.0, n, &pool, &non_holes, parts), |c| c.clone())?;
        Ok(c[j])
    };
    let leaves = decompose(ch, variant, &priorities(crs, n), rest, non_holes.len(), false, &cut_of)?;

    let mut hole_of = grabbed.clone();
    for l in &leaves {
        hole_of[l.agent] = pool.get(l.bundle).copied();
    }
    let mut holes: Vec<usize> = grabbed.iter().flatten().copied().collect();
    holes.extend_from_slice(&pool);
    let semi = SemiContiguousAllocation::from_line(m, &non_holes, &ranges_of(n, &leaves), holes, hole_of);
    let mut d = Decided::from_owner(semi.to_allocation()?.owner().to_vec());
    d.diagnostics.holes_pool = pool;
    d.diagnostics.non_holes = non_holes;
    d.semi = Some(semi);
    Ok(d)
}

pub(crate) fn referee_cut_choose(p: &PublicParams, ch: &mut Channel<'_>) -> Result<Decided, ProtocolError> {
    let m = p.m;
    let mut a = ask(ch, 0, "partition", |v| {
        let parts = mms_exact(v, 2).map_err(|_| "maximin partition unavailable")?.partition;
        let mut r = Reply::new();
        for e in 0..m {
            r = r.flag(parts[1].contains(&e));
        }
        Ok(r)
    })?;
    let side: Vec<bool> = (0..m).map(|_| a.flag()).collect::<Result<_, _>>()?;
    a.finish()?;
    let mut b = ask(ch, 1, "choose", |v| {
        let ones = v.raw_value((0..m).filter(|&e| side[e]));
        let zeros = v.raw_value((0..m).filter(|&e| !side[e]));
        Ok(Reply::new().flag(ones > zeros))
    })?;
    let pick = b.flag()?;
    b.finish()?;
    Ok(Decided::from_owner(side.iter().map(|&s| usize::from(s == pick)).collect()))
}

pub(crate) fn referee_round_robin(p: &PublicParams, ch: &mut Channel<'_>) -> Result<Decided, ProtocolError> {
    let mut remaining: Vec<usize> = (0..p.m).collect();
    let mut owner = alloc::vec![0; p.m];
    let mut turn = 0;
    while !remaining.is_empty() {
        let agent = turn % p.n;
        let mut a = ask(ch, agent, "pick", |v| {
            let q =
                (0..remaining.len()).max_by_key(|&q| (v.item(remaining[q]), core::cmp::Reverse(q))).expect("non-empty");
            Ok(Reply::new().choice(q, remaining.len()))
        })?;
        let q = a.choice(remaining.len())?;
        a.finish()?;
        owner[remaining.remove(q)] = agent;
        turn += 1;
    }
    Ok(Decided::from_owner(owner))
}
