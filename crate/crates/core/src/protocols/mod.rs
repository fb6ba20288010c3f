//! Allocation protocols run by a referee over the metered channel.
//!
//! Every protocol is a referee function that sees only the public parameters
//! (`n`, `m`, valuation kind and scale), the common random string and the
//! decoded replies. Agent programs are closures handed to
//! [`Channel::ask`]; they read nothing but their own valuation and public
//! state. The same referee therefore runs live or against a recorded
//! transcript.

mod additive;
mod binary;
mod families;
mod median;
mod semi;
mod two_valued;
mod unit_demand;

pub use additive::{
    aprop_allocate, cut_and_choose, default_bundle_count, round_robin, tps_random_bundling, tps_two_phase,
};
pub use binary::binary_mms_threephase;
pub use families::precondition_instance;
pub use median::{agent_prop1_partition, prop1_allocate, MedianVariant};
pub use semi::SemiContiguousAllocation;
pub use two_valued::two_valued_mms;
pub use unit_demand::{
    identical_ud_random_queries, rud, two_agent_ud, ud_ef1, ud_mms_deterministic, Ef1Variant, TwoAgentVariant,
};

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::{Cell, RefCell};
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::channel::{Answer, Channel, ChannelError, Crs, Entry, Reply, Transcript};
use crate::model::{Allocation, Instance, ModelError, Valuation, ValuationKind};
use crate::shares::{default_rho, FairnessNotion, ShareError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Share(#[from] ShareError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("protocol failure: {0}")]
    Failure(&'static str),
    #[error("invalid semi-contiguous allocation: {0}")]
    Structure(&'static str),
    #[error("unknown protocol id {0:?}")]
    UnknownProtocol(String),
}

/// What the referee may know about an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PublicParams {
    pub n: usize,
    pub m: usize,
    pub kind: ValuationKind,
    pub scale: u64,
}

impl PublicParams {
    pub fn of(inst: &Instance) -> Self {
        PublicParams { n: inst.n(), m: inst.m(), kind: inst.kind(), scale: inst.scale() }
    }
}

/// State of one unsatisfied agent's turn in the randomized unit-demand
/// protocol. `eligible` is known only in live runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RudSnapshot {
    pub unsatisfied: usize,
    pub eligible: Option<usize>,
    pub rank: usize,
}

/// Observability only: nothing here feeds back into an allocation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunDiagnostics {
    /// Sad agents entering the last phase of the binary protocol.
    pub sad: Option<usize>,
    /// Per-agent target counts `k_i`.
    pub targets: Vec<usize>,
    /// Per-agent prefix start and length (binary protocol, phase 2).
    pub prefix_starts: Vec<Option<usize>>,
    pub prefix_lens: Vec<Option<usize>>,
    pub main_sets: Vec<Vec<usize>>,
    pub leftover: Vec<usize>,
    /// Holes pool and non-hole items of the semi-contiguous protocol.
    pub holes_pool: Vec<usize>,
    pub non_holes: Vec<usize>,
    pub rud: Vec<RudSnapshot>,
    /// Random bundling or partition attempts (1 when the first succeeds).
    pub attempts: usize,
    /// Queries issued by the identical unit-demand protocol.
    pub queries: usize,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub allocation: Allocation,
    pub transcript: Transcript,
    pub diagnostics: RunDiagnostics,
    pub semi: Option<SemiContiguousAllocation>,
}

/// Referee result before padding items are dropped.
#[derive(Debug, Clone, Default)]
pub(crate) struct Decided {
    pub owner: Vec<usize>,
    pub diagnostics: RunDiagnostics,
    pub semi: Option<SemiContiguousAllocation>,
}

impl Decided {
    pub fn from_owner(owner: Vec<usize>) -> Self {
        Decided { owner, ..Default::default() }
    }

    pub fn from_bundles(m: usize, bundles: &[Vec<usize>]) -> Self {
        let mut owner = alloc::vec![usize::MAX; m];
        for (agent, b) in bundles.iter().enumerate() {
            for &e in b {
                if e < m {
                    owner[e] = agent;
                }
            }
        }
        Decided::from_owner(owner)
    }
}

/// Protocols addressable by a stable string id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolId {
    Ud2(TwoAgentVariant),
    IdenticalUd,
    UdDet,
    Rud,
    UdEf1(Ef1Variant),
    Binary3p,
    TwoValued,
    Prop1(MedianVariant),
    Tps2p,
    Aprop(MedianVariant),
    /// Random bundling with an optional explicit bundle count.
    TpsBundling(Option<usize>),
    CutChoose,
    RoundRobin,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 19] = [
        ProtocolId::Ud2(TwoAgentVariant::Naive),
        ProtocolId::Ud2(TwoAgentVariant::Announce),
        ProtocolId::Ud2(TwoAgentVariant::Bitsplit),
        ProtocolId::Ud2(TwoAgentVariant::Randomized),
        ProtocolId::IdenticalUd,
        ProtocolId::UdDet,
        ProtocolId::Rud,
        ProtocolId::UdEf1(Ef1Variant::FirstRoundRr),
        ProtocolId::UdEf1(Ef1Variant::Bundled),
        ProtocolId::Binary3p,
        ProtocolId::TwoValued,
        ProtocolId::Prop1(MedianVariant::Det),
        ProtocolId::Prop1(MedianVariant::Rand),
        ProtocolId::Tps2p,
        ProtocolId::Aprop(MedianVariant::Det),
        ProtocolId::Aprop(MedianVariant::Rand),
        ProtocolId::TpsBundling(None),
        ProtocolId::CutChoose,
        ProtocolId::RoundRobin,
    ];

    /// The checker the protocol's output must pass.
    pub fn declared_notion(self, n: usize) -> FairnessNotion {
        use ProtocolId::*;
        match self {
            Ud2(_) | IdenticalUd | UdDet | Rud | Binary3p | TwoValued | CutChoose => FairnessNotion::Mms,
            UdEf1(_) | RoundRobin => FairnessNotion::Ef1,
            Prop1(_) => FairnessNotion::Prop1Strict,
            Tps2p | TpsBundling(_) => FairnessNotion::RhoTps(default_rho(n)),
            Aprop(_) => FairnessNotion::Aprop,
        }
    }

    /// Preconditions decidable from public parameters.
    pub fn check_public(self, p: &PublicParams) -> Result<(), ProtocolError> {
        use ProtocolError::Precondition as Pre;
        use ProtocolId::*;
        let ud_like = matches!(p.kind, ValuationKind::UnitDemand | ValuationKind::BinaryAdditive);
        if p.n == 0 {
            return Err(Pre("at least one agent is required"));
        }
        match self {
            Ud2(_) if p.n != 2 => Err(Pre("exactly two agents are required")),
            Ud2(_) if p.m < 2 => Err(Pre("at least two items are required")),
            Ud2(_) | IdenticalUd if !ud_like => Err(Pre("unit-demand or binary valuations are required")),
            IdenticalUd if p.m < p.n => Err(Pre("at least n items are required")),
            UdDet | Rud if !ud_like => Err(Pre("unit-demand or binary valuations are required")),
            UdDet | Rud if p.m < 2 * p.n => Err(Pre("at least 2n items are required")),
            UdEf1(_) if p.kind != ValuationKind::UnitDemand => Err(Pre("unit-demand valuations are required")),
            Binary3p if p.kind != ValuationKind::BinaryAdditive => Err(Pre("binary valuations are required")),
            TwoValued if !matches!(p.kind, ValuationKind::TwoValued { .. } | ValuationKind::BinaryAdditive) => {
                Err(Pre("two-valued valuations are required"))
            }
            Prop1(_) | Tps2p | Aprop(_) | TpsBundling(_) | RoundRobin if !p.kind.is_additive() => {
                Err(Pre("additive valuations are required"))
            }
            CutChoose if p.n != 2 || !p.kind.is_additive() => Err(Pre("two additive agents are required")),
            CutChoose if p.m > crate::shares::MMS_TWO_AGENT_CAP_M => {
                Err(Pre("too many items for the exact maximin partition"))
            }
            TpsBundling(Some(0)) => Err(Pre("bundle count must be positive")),
            _ => Ok(()),
        }
    }

    /// All preconditions, including those about private values that the
    /// caller is responsible for.
    pub fn check_precondition(self, inst: &Instance) -> Result<(), ProtocolError> {
        self.check_public(&PublicParams::of(inst))?;
        if self == ProtocolId::IdenticalUd && !inst.is_identical() {
            return Err(ProtocolError::Precondition("valuations must be identical"));
        }
        Ok(())
    }

    pub fn run(self, inst: &Instance, crs: &Crs) -> Result<Outcome, ProtocolError> {
        self.check_precondition(inst)?;
        drive(self, &PublicParams::of(inst), crs, Channel::live(inst))
    }

    /// Rebuild an outcome from recorded replies, without any valuation.
    pub fn replay(self, p: &PublicParams, crs: &Crs, entries: Vec<Entry>) -> Result<Outcome, ProtocolError> {
        self.check_public(p)?;
        drive(self, p, crs, Channel::replay(entries))
    }

    fn referee(self, p: &PublicParams, crs: &Crs, ch: &mut Channel<'_>) -> Result<Decided, ProtocolError> {
        use ProtocolId::*;
        match self {
            Ud2(v) => unit_demand::referee_two_agent(p, crs, ch, v),
            IdenticalUd => unit_demand::referee_identical(p, crs, ch),
            UdDet => unit_demand::referee_det(p, ch),
            Rud => unit_demand::referee_rud(p, crs, ch),
            UdEf1(v) => unit_demand::referee_ef1(p, crs, ch, v),
            Binary3p => binary::referee(p, crs, ch),
            TwoValued => two_valued::referee(p, ch),
            Prop1(v) => median::referee_prop1(p, crs, ch, v),
            Tps2p => additive::referee_tps(p, crs, ch),
            Aprop(v) => additive::referee_aprop(p, crs, ch, v),
            TpsBundling(k) => additive::referee_bundling(p, crs, ch, k.unwrap_or_else(|| default_bundle_count(p.n))),
            CutChoose => additive::referee_cut_choose(p, ch),
            RoundRobin => additive::referee_round_robin(p, ch),
        }
    }
}

/// A lone agent takes everything; protocols with a semi-contiguous output
/// still report it, as one block with no holes.
fn single_agent(id: ProtocolId, m: usize) -> Decided {
    let mut d = Decided::from_owner(alloc::vec![0; m]);
    if matches!(id, ProtocolId::Aprop(_) | ProtocolId::Tps2p) {
        d.semi = Some(SemiContiguousAllocation {
            blocks: alloc::vec![0..m],
            holes: Vec::new(),
            hole_of: alloc::vec![None],
            m,
        });
    }
    d
}

fn drive(id: ProtocolId, p: &PublicParams, crs: &Crs, mut ch: Channel<'_>) -> Result<Outcome, ProtocolError> {
    let decided = if p.n == 1 { single_agent(id, p.m) } else { id.referee(p, crs, &mut ch)? };
    let mut owner = decided.owner;
    owner.truncate(p.m);
    let allocation = Allocation::new(p.n, owner)?;
    if let Some(semi) = &decided.semi {
        if semi.to_allocation()? != allocation {
            return Err(ProtocolError::Structure("semi-contiguous form disagrees with the allocation"));
        }
    }
    Ok(Outcome { allocation, transcript: ch.into_transcript()?, diagnostics: decided.diagnostics, semi: decided.semi })
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ProtocolId::*;
        let s = match self {
            Ud2(TwoAgentVariant::Naive) => "ud2-naive",
            Ud2(TwoAgentVariant::Announce) => "ud2-announce",
            Ud2(TwoAgentVariant::Bitsplit) => "ud2-bitsplit",
            Ud2(TwoAgentVariant::Randomized) => "ud2-rand",
            IdenticalUd => "identical-ud",
            UdDet => "ud-det",
            Rud => "rud",
            UdEf1(Ef1Variant::FirstRoundRr) => "ud-ef1-rr",
            UdEf1(Ef1Variant::Bundled) => "ud-ef1-bundled",
            Binary3p => "binary3p",
            TwoValued => "two-valued",
            Prop1(MedianVariant::Det) => "prop1-det",
            Prop1(MedianVariant::Rand) => "prop1-rand",
            Tps2p => "tps2p",
            Aprop(MedianVariant::Det) => "aprop-det",
            Aprop(MedianVariant::Rand) => "aprop-rand",
            TpsBundling(None) => "tps-bundling",
            TpsBundling(Some(k)) => return write!(f, "tps-bundling:{k}"),
            CutChoose => "cut-choose",
            RoundRobin => "round-robin",
        };
        f.write_str(s)
    }
}

impl FromStr for ProtocolId {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(k) = s.strip_prefix("tps-bundling:") {
            let k = k.parse().map_err(|_| ProtocolError::UnknownProtocol(s.to_string()))?;
            return Ok(ProtocolId::TpsBundling(Some(k)));
        }
        ProtocolId::ALL
            .iter()
            .copied()
            .find(|id| id.to_string() == s)
            .ok_or_else(|| ProtocolError::UnknownProtocol(s.to_string()))
    }
}

/// Ask an agent; the program may abort, which surfaces as a protocol failure
/// (it signals a broken invariant, never a legitimate outcome).
pub(crate) fn ask(
    ch: &mut Channel<'_>,
    agent: usize,
    label: &str,
    program: impl FnOnce(&Valuation) -> Result<Reply, &'static str>,
) -> Result<Answer, ProtocolError> {
    let fault = Cell::new(None);
    let answer = ch.ask(agent, label, |v| {
        program(v).unwrap_or_else(|e| {
            fault.set(Some(e));
            Reply::new()
        })
    })?;
    match fault.get() {
        Some(e) => Err(ProtocolError::Failure(e)),
        None => Ok(answer),
    }
}

/// Per-agent private scratch memory for agent programs, so that derived data
/// (a truncated valuation, a partition) is computed once per agent.
pub(crate) struct Memo<T> {
    slots: RefCell<Vec<Option<T>>>,
}

impl<T> Memo<T> {
    pub fn new(n: usize) -> Self {
        Memo { slots: RefCell::new((0..n).map(|_| None).collect()) }
    }

    pub fn with<R>(&self, agent: usize, init: impl FnOnce() -> T, f: impl FnOnce(&T) -> R) -> R {
        let mut slots = self.slots.borrow_mut();
        let slot = slots[agent].get_or_insert_with(init);
        f(slot)
    }
}

/// The `n` items an agent values most (index order breaks ties): her valued
/// items under the binary image of a unit-demand valuation.
pub(crate) fn valued_items(v: &Valuation, n: usize) -> Vec<usize> {
    let mut r = v.ranked_items();
    r.truncate(n);
    r
}

pub(crate) fn malformed(what: &'static str) -> ProtocolError {
    ProtocolError::Channel(ChannelError::Malformed(what))
}

/// Position of the lowest bit where `a` and `b` differ.
pub(crate) fn lowest_diff_bit(a: usize, b: usize) -> usize {
    (a ^ b).trailing_zeros() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_roundtrip() {
        for id in ProtocolId::ALL {
            assert_eq!(id.to_string().parse::<ProtocolId>().unwrap(), id);
        }
        assert_eq!("tps-bundling:64".parse::<ProtocolId>().unwrap(), ProtocolId::TpsBundling(Some(64)));
        assert!("nope".parse::<ProtocolId>().is_err());
    }
}
