//! Text names for families and fairness notions, as used on the command line
//! and in sweep configurations.

use std::fmt;
use std::str::FromStr;

use fairbits_core::bounds::Acceptance;
use fairbits_core::model::{gen_instance, Family, ModelError};
use fairbits_core::protocols::{precondition_instance, ProtocolId};
use fairbits_core::shares::{default_rho, FairnessNotion};
use fairbits_core::{Instance, Value};

/// An instance source: a concrete family, the hard unit-demand family with
/// its default parameter for the given `m`, or the protocol's own
/// precondition sampler (which picks `n` and `m` itself).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilySpec {
    Fixed(Family),
    Ef1HardDefault,
    Precondition,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {what} {text:?}: {why}")]
pub struct NameError {
    pub what: &'static str,
    pub text: String,
    pub why: &'static str,
}

fn name_error(what: &'static str, text: &str, why: &'static str) -> NameError {
    NameError { what, text: text.to_string(), why }
}

impl FamilySpec {
    pub fn generate(&self, protocol: ProtocolId, n: usize, m: usize, seed: u64) -> Result<Instance, ModelError> {
        match *self {
            FamilySpec::Fixed(f) => gen_instance(f, n, m, seed),
            FamilySpec::Ef1HardDefault => gen_instance(Family::ef1_hard_default(m), n, m, seed),
            FamilySpec::Precondition => precondition_instance(protocol, seed),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FamilySpec::Ef1HardDefault => write!(f, "ef1-hard"),
            FamilySpec::Precondition => write!(f, "precondition"),
            FamilySpec::Fixed(family) => {
                let name = family.name();
                match family {
                    Family::BinaryBalanced { k }
                    | Family::BinaryRandom { k }
                    | Family::TwoValuedHard { k }
                    | Family::Ef1Hard { k } => write!(f, "{name}:{k}"),
                    Family::TwoValuedRandom { high, low } => write!(f, "{name}:{high}:{low}"),
                    Family::IdenticalAdditiveHard { k, big_k } => write!(f, "{name}:{k}:{big_k}"),
                    Family::UniformAdditive { max_value } => write!(f, "{name}:{max_value}"),
                    Family::UdTopN | Family::IdenticalUd | Family::HeavyTailAdditive => f.write_str(name),
                }
            }
        }
    }
}

impl FromStr for FamilySpec {
    type Err = NameError;

    /// `name[:param[:param]]`, e.g. `binary-balanced:2`, `two-valued-random:5:1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |why| name_error("family", s, why);
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default();
        let params = parts
            .map(|p| p.parse::<u64>().map_err(|_| err("parameters must be non-negative integers")))
            .collect::<Result<Vec<_>, _>>()?;
        let k = |i: usize| params.get(i).copied().ok_or_else(|| err("missing parameter"));
        let arity = |want: usize| if params.len() == want { Ok(()) } else { Err(err("wrong number of parameters")) };
        let spec = match name {
            "precondition" => FamilySpec::Precondition,
            "ef1-hard" if params.is_empty() => FamilySpec::Ef1HardDefault,
            "ef1-hard" => FamilySpec::Fixed(Family::Ef1Hard { k: k(0)? as usize }),
            "binary-balanced" => FamilySpec::Fixed(Family::BinaryBalanced { k: k(0)? as usize }),
            "binary-random" => FamilySpec::Fixed(Family::BinaryRandom { k: k(0)? as usize }),
            "two-valued-hard" => FamilySpec::Fixed(Family::TwoValuedHard { k: k(0)? as usize }),
            "two-valued-random" => FamilySpec::Fixed(Family::TwoValuedRandom { high: k(0)?, low: k(1)? }),
            "identical-additive-hard" => {
                FamilySpec::Fixed(Family::IdenticalAdditiveHard { k: k(0)? as usize, big_k: k(1)? })
            }
            "uniform-additive" => FamilySpec::Fixed(Family::UniformAdditive { max_value: k(0)? }),
            "ud-top-n" => FamilySpec::Fixed(Family::UdTopN),
            "identical-ud" => FamilySpec::Fixed(Family::IdenticalUd),
            "heavy-tail-additive" => FamilySpec::Fixed(Family::HeavyTailAdditive),
            _ => return Err(err("unknown family")),
        };
        let want = match spec {
            FamilySpec::Fixed(Family::TwoValuedRandom { .. } | Family::IdenticalAdditiveHard { .. }) => 2,
            FamilySpec::Fixed(
                Family::BinaryBalanced { .. }
                | Family::BinaryRandom { .. }
                | Family::TwoValuedHard { .. }
                | Family::Ef1Hard { .. }
                | Family::UniformAdditive { .. },
            ) => 1,
            _ => 0,
        };
        arity(want)?;
        Ok(spec)
    }
}

/// A fairness notion, or `all` for the accept-everything baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotionSpec(pub Acceptance);

impl NotionSpec {
    /// The checker, if this is a real notion.
    pub fn notion(&self) -> Option<FairnessNotion> {
        match self.0 {
            Acceptance::Notion(n) => Some(n),
            Acceptance::Everything => None,
        }
    }
}

fn parse_ratio(s: &str) -> Option<Value> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let (p, q) = (p.parse::<u128>().ok()?, q.parse::<u128>().ok()?);
    (q > 0 && p > 0 && p <= q).then(|| Value::new(p, q))
}

impl fmt::Display for NotionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Acceptance::Everything => f.write_str("all"),
            Acceptance::Notion(n @ (FairnessNotion::RhoTps(r) | FairnessNotion::RhoMms(r))) => {
                write!(f, "{}:{}/{}", n.name(), r.numer(), r.denom())
            }
            Acceptance::Notion(n) => f.write_str(n.name()),
        }
    }
}

impl NotionSpec {
    /// Parses a notion; `rho-tps` without a factor takes `n / (2n - 1)`.
    pub fn parse(s: &str, n: usize) -> Result<Self, NameError> {
        let err = |why| name_error("notion", s, why);
        let (name, arg) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
        let rho = |default: Option<Value>| match arg {
            Some(a) => parse_ratio(a).ok_or_else(|| err("factor must be p/q in (0, 1]")),
            None => default.ok_or_else(|| err("missing factor")),
        };
        let notion = match name {
            "all" => return Ok(NotionSpec(Acceptance::Everything)),
            "prop1" => FairnessNotion::Prop1Strict,
            "prop1-weak" => FairnessNotion::Prop1Weak,
            "rho-tps" => FairnessNotion::RhoTps(rho(Some(default_rho(n)))?),
            "aprop" => FairnessNotion::Aprop,
            "ef" => FairnessNotion::Ef,
            "ef1" => FairnessNotion::Ef1,
            "efx" => FairnessNotion::Efx,
            "eqx" => FairnessNotion::Eqx,
            "mms" => FairnessNotion::Mms,
            "rho-mms" => FairnessNotion::RhoMms(rho(None)?),
            "mxs" => FairnessNotion::Mxs,
            _ => return Err(err("unknown notion")),
        };
        if arg.is_some() && !matches!(notion, FairnessNotion::RhoTps(_) | FairnessNotion::RhoMms(_)) {
            return Err(err("this notion takes no factor"));
        }
        Ok(NotionSpec(Acceptance::Notion(notion)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_roundtrip() {
        for text in [
            "binary-balanced:2",
            "binary-random:0",
            "two-valued-hard:1",
            "two-valued-random:5:1",
            "identical-additive-hard:2:16",
            "ef1-hard:3",
            "ef1-hard",
            "ud-top-n",
            "identical-ud",
            "uniform-additive:30",
            "heavy-tail-additive",
            "precondition",
        ] {
            assert_eq!(text.parse::<FamilySpec>().unwrap().to_string(), text);
        }
        assert!("binary-balanced".parse::<FamilySpec>().is_err());
        assert!("ud-top-n:3".parse::<FamilySpec>().is_err());
        assert!("nope".parse::<FamilySpec>().is_err());
    }

    #[test]
    fn notion_names() {
        for text in ["all", "prop1", "aprop", "ef1", "mms", "mxs", "rho-mms:3/4", "rho-tps:2/3"] {
            assert_eq!(NotionSpec::parse(text, 2).unwrap().to_string(), text);
        }
        assert_eq!(NotionSpec::parse("rho-tps", 3).unwrap().to_string(), "rho-tps:3/5");
        assert!(NotionSpec::parse("rho-mms", 2).is_err());
        assert!(NotionSpec::parse("rho-mms:5/4", 2).is_err());
        assert!(NotionSpec::parse("mms:1/2", 2).is_err());
    }
}
