use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::codes::{encode_choice, encode_subset_rank, encode_uint, encode_unary, BitReader};
use super::ChannelError;
use crate::model::{Instance, Valuation};

/// One agent reply.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub agent: usize,
    pub label: String,
    pub payload: Vec<bool>,
    /// Idealized cost in bits (choices count `log2 k`).
    pub ideal: f64,
}

/// Append-only log of agent replies. Referee computation is never recorded.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Transcript {
    entries: Vec<Entry>,
    integer_bits: u64,
    idealized_bits: f64,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_reply(&mut self, agent: usize, payload: Vec<bool>, ideal: f64, label: &str) {
        self.integer_bits += payload.len() as u64;
        self.idealized_bits += ideal;
        self.entries.push(Entry { agent, label: label.to_string(), payload, ideal });
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn integer_bits(&self) -> u64 {
        self.integer_bits
    }

    pub fn idealized_bits(&self) -> f64 {
        self.idealized_bits
    }

    /// Integer bits sent by each of `n` agents.
    pub fn bits_per_agent(&self, n: usize) -> Vec<u64> {
        let mut out = alloc::vec![0; n];
        for e in &self.entries {
            if e.agent < n {
                out[e.agent] += e.payload.len() as u64;
            }
        }
        out
    }

    /// One line per entry: `agent,label,bits,payload` with the payload in hex,
    /// packed most significant bit first and zero-padded to whole bytes.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = write!(out, "{},{},{},", e.agent, e.label, e.payload.len());
            for chunk in e.payload.chunks(8) {
                let byte = chunk.iter().enumerate().fold(0u8, |b, (i, &x)| b | (x as u8) << (7 - i));
                let _ = write!(out, "{byte:02x}");
            }
            out.push('\n');
        }
        out
    }

    /// Parse a dump. Idealized costs are not stored, so each entry gets its
    /// integer length.
    pub fn parse_dump(text: &str) -> Result<Vec<Entry>, ChannelError> {
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = || ChannelError::BadDump { line: idx + 1 };
            let mut parts = line.trim().split(',');
            let agent: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let label = parts.next().ok_or_else(bad)?.to_string();
            let len: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let hex = parts.next().ok_or_else(bad)?;
            if parts.next().is_some() || hex.len() != len.div_ceil(8) * 2 || !hex.is_ascii() {
                return Err(bad());
            }
            let mut payload = Vec::with_capacity(len);
            for i in 0..len.div_ceil(8) {
                let byte = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
                for b in 0..8 {
                    if payload.len() < len {
                        payload.push(byte >> (7 - b) & 1 == 1);
                    }
                }
            }
            entries.push(Entry { agent, label, ideal: len as f64, payload });
        }
        Ok(entries)
    }
}

/// Builder for an agent's reply. Encoding preconditions are the agent
/// program's responsibility; violating one is a bug and panics.
#[derive(Debug, Clone, Default)]
pub struct Reply {
    bits: Vec<bool>,
    ideal: f64,
}

impl Reply {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn flag(mut self, b: bool) -> Self {
        self.bits.push(b);
        self.ideal += 1.0;
        self
    }

    pub fn uint(mut self, k: u64) -> Self {
        let b = encode_uint(k);
        self.ideal += b.len() as f64;
        self.bits.extend(b);
        self
    }

    pub fn unary(mut self, l: u64) -> Self {
        let b = encode_unary(l).expect("unary length must be positive");
        self.ideal += b.len() as f64;
        self.bits.extend(b);
        self
    }

    pub fn choice(mut self, index: usize, k: usize) -> Self {
        let (b, ideal) = encode_choice(index as u64, k as u64).expect("choice in range");
        self.ideal += ideal;
        self.bits.extend(b);
        self
    }

    pub fn subset(mut self, chosen: &[usize], r: usize) -> Self {
        let (b, ideal) = encode_subset_rank(chosen, r, chosen.len()).expect("subset in range");
        self.ideal += ideal;
        self.bits.extend(b);
        self
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Bits of one received reply, decoded by the referee.
#[derive(Debug, Clone)]
pub struct Answer {
    bits: Vec<bool>,
    pos: usize,
}

impl Answer {
    fn with<T>(&mut self, f: impl FnOnce(&mut BitReader<'_>) -> Result<T, ChannelError>) -> Result<T, ChannelError> {
        let mut r = BitReader::new(&self.bits[self.pos..]);
        let out = f(&mut r)?;
        self.pos = self.bits.len() - r.remaining();
        Ok(out)
    }

    pub fn flag(&mut self) -> Result<bool, ChannelError> {
        self.with(|r| r.flag())
    }

    pub fn uint(&mut self) -> Result<u64, ChannelError> {
        self.with(|r| r.uint())
    }

    pub fn unary(&mut self) -> Result<u64, ChannelError> {
        self.with(|r| r.unary())
    }

    pub fn choice(&mut self, k: usize) -> Result<usize, ChannelError> {
        self.with(|r| r.choice(k as u64)).map(|x| x as usize)
    }

    pub fn subset(&mut self, r: usize, s: usize) -> Result<Vec<usize>, ChannelError> {
        self.with(|rd| rd.subset(r, s))
    }

    pub fn finish(self) -> Result<(), ChannelError> {
        if self.pos == self.bits.len() {
            Ok(())
        } else {
            Err(ChannelError::Malformed("trailing bits"))
        }
    }
}

enum Source<'a> {
    Live(&'a Instance),
    Replay { entries: Vec<Entry>, next: usize },
}

/// The only path from private valuations to the referee. In live mode the
/// agent program sees its own valuation; in replay mode the recorded replies
/// are returned instead and no valuation is available at all.
pub struct Channel<'a> {
    source: Source<'a>,
    transcript: Transcript,
}

impl<'a> Channel<'a> {
    pub fn live(inst: &'a Instance) -> Self {
        Channel { source: Source::Live(inst), transcript: Transcript::new() }
    }

    pub fn replay(entries: Vec<Entry>) -> Channel<'static> {
        Channel { source: Source::Replay { entries, next: 0 }, transcript: Transcript::new() }
    }

    /// Ask `agent` a question; the closure is the agent's answering program.
    pub fn ask(
        &mut self,
        agent: usize,
        label: &str,
        program: impl FnOnce(&Valuation) -> Reply,
    ) -> Result<Answer, ChannelError> {
        let (bits, ideal) = match &mut self.source {
            Source::Live(inst) => {
                let v = inst.valuations().get(agent).ok_or(ChannelError::UnknownAgent { agent })?;
                let reply = program(v);
                (reply.bits, reply.ideal)
            }
            Source::Replay { entries, next } => {
                let e = entries.get(*next).ok_or(ChannelError::ReplayExhausted)?;
                if e.agent != agent || e.label != label {
                    return Err(ChannelError::ReplayMismatch { index: *next, agent, label: label.to_string() });
                }
                *next += 1;
                (e.payload.clone(), e.ideal)
            }
        };
        self.transcript.record_reply(agent, bits.clone(), ideal, label);
        Ok(Answer { bits, pos: 0 })
    }

    /// Finish the run; in replay mode every recorded reply must be consumed.
    pub fn into_transcript(self) -> Result<Transcript, ChannelError> {
        if let Source::Replay { entries, next } = &self.source {
            if *next != entries.len() {
                return Err(ChannelError::ReplayLeftover { unused: entries.len() - next });
            }
        }
        Ok(self.transcript)
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn counters() {
        let mut t = Transcript::new();
        t.record_reply(0, vec![true], 1.0, "a");
        assert_eq!(t.integer_bits(), 1);
        let mut t = Transcript::new();
        t.record_reply(0, vec![true; 3], 3.0, "a");
        t.record_reply(1, vec![false; 4], 4.0, "b");
        assert_eq!(t.integer_bits(), 7);
        assert_eq!(t.bits_per_agent(2), vec![3, 4]);
    }

    #[test]
    fn dump_roundtrip() {
        let mut t = Transcript::new();
        t.record_reply(0, vec![true, false, true], 3.0, "x");
        t.record_reply(2, vec![], 0.0, "empty");
        t.record_reply(1, vec![true; 9], 9.0, "long");
        let text = t.dump();
        assert_eq!(text, "0,x,3,a0\n2,empty,0,\n1,long,9,ff80\n");
        let parsed = Transcript::parse_dump(&text).unwrap();
        assert_eq!(parsed, t.entries());
        assert!(Transcript::parse_dump("0,x,3,a").is_err());
        assert!(Transcript::parse_dump("zero,x,0,").is_err());
    }

    #[test]
    fn live_and_replay_agree() {
        let inst = Instance::new(vec![Valuation::additive(vec![3, 1])]).unwrap();
        let mut ch = Channel::live(&inst);
        let mut a = ch.ask(0, "top", |v| Reply::new().choice(v.ranked_items()[0], 2).uint(9)).unwrap();
        assert_eq!((a.choice(2).unwrap(), a.uint().unwrap()), (0, 9));
        a.finish().unwrap();
        let t = ch.into_transcript().unwrap();
        let mut rp = Channel::replay(t.entries().to_vec());
        let mut b = rp.ask(0, "top", |_| unreachable!()).unwrap();
        assert_eq!(b.choice(2).unwrap(), 0);
        assert!(rp.ask(0, "other", |_| unreachable!()).is_err());
    }
}
