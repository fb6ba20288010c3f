use alloc::vec::Vec;
use core::fmt;

use super::{ModelError, Value};

/// Valuation class. Two-valued valuations carry their public pair of values
/// (as numerators over the instance scale).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValuationKind {
    UnitDemand,
    BinaryAdditive,
    TwoValued { high: u64, low: u64 },
    Additive,
}

impl ValuationKind {
    pub fn is_additive(self) -> bool {
        !matches!(self, ValuationKind::UnitDemand)
    }

    pub fn name(self) -> &'static str {
        match self {
            ValuationKind::UnitDemand => "unit-demand",
            ValuationKind::BinaryAdditive => "binary",
            ValuationKind::TwoValued { .. } => "two-valued",
            ValuationKind::Additive => "additive",
        }
    }
}

impl fmt::Display for ValuationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An item-based valuation: per-item integer numerators over a shared scale.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Valuation {
    kind: ValuationKind,
    values: Vec<u64>,
    scale: u64,
}

impl Valuation {
    pub fn new(kind: ValuationKind, values: Vec<u64>, scale: u64) -> Result<Self, ModelError> {
        if scale == 0 {
            return Err(ModelError::ZeroScale);
        }
        match kind {
            ValuationKind::BinaryAdditive => {
                if let Some((item, &value)) = values.iter().enumerate().find(|(_, &x)| x != 0 && x != scale) {
                    return Err(ModelError::ClassViolation { item, value, kind: kind.name() });
                }
            }
            ValuationKind::TwoValued { high, low } => {
                if high <= low {
                    return Err(ModelError::BadTwoValues { high, low });
                }
                if let Some((item, &value)) = values.iter().enumerate().find(|(_, &x)| x != high && x != low) {
                    return Err(ModelError::ClassViolation { item, value, kind: kind.name() });
                }
            }
            ValuationKind::UnitDemand | ValuationKind::Additive => {}
        }
        Ok(Valuation { kind, values, scale })
    }

    pub fn additive(values: Vec<u64>) -> Self {
        Valuation { kind: ValuationKind::Additive, values, scale: 1 }
    }

    pub fn unit_demand(values: Vec<u64>) -> Self {
        Valuation { kind: ValuationKind::UnitDemand, values, scale: 1 }
    }

    /// Binary valuation with value 1 on `ones`.
    pub fn binary(m: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut values = alloc::vec![0; m];
        for e in ones {
            values[e] = 1;
        }
        Valuation { kind: ValuationKind::BinaryAdditive, values, scale: 1 }
    }

    pub fn kind(&self) -> ValuationKind {
        self.kind
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    /// Numerator of an item value; indices past the end are zero-valued padding.
    #[inline]
    pub fn item(&self, e: usize) -> u64 {
        self.values.get(e).copied().unwrap_or(0)
    }

    /// Numerator of the bundle value (sum, or max for unit demand).
    pub fn raw_value<I: IntoIterator<Item = usize>>(&self, bundle: I) -> u128 {
        let it = bundle.into_iter().map(|e| self.item(e) as u128);
        match self.kind {
            ValuationKind::UnitDemand => it.max().unwrap_or(0),
            _ => it.sum(),
        }
    }

    pub fn raw_total(&self) -> u128 {
        self.raw_value(0..self.m())
    }

    /// Exact bundle value; errors on an out-of-range index.
    pub fn value_of(&self, bundle: &[usize]) -> Result<Value, ModelError> {
        if let Some(&index) = bundle.iter().find(|&&e| e >= self.m()) {
            return Err(ModelError::ItemOutOfRange { index, m: self.m() });
        }
        Ok(self.to_value(self.raw_value(bundle.iter().copied())))
    }

    pub fn to_value(&self, raw: u128) -> Value {
        Value::new(raw, self.scale as u128)
    }

    /// Number of items with value equal to the scale (value one).
    pub fn count_ones(&self) -> usize {
        self.values.iter().filter(|&&x| x == self.scale).count()
    }

    /// Number of items carrying the high value of a two-valued class.
    pub fn count_high(&self) -> usize {
        match self.kind {
            ValuationKind::TwoValued { high, .. } => self.values.iter().filter(|&&x| x == high).count(),
            _ => 0,
        }
    }

    /// Items ordered by decreasing value, ties by lower index.
    pub fn ranked_items(&self) -> Vec<usize> {
        let mut items: Vec<usize> = (0..self.m()).collect();
        items.sort_by(|&a, &b| self.values[b].cmp(&self.values[a]).then(a.cmp(&b)));
        items
    }
}

/// Replace a unit-demand valuation by the binary valuation whose ones are the
/// `n` top items (ties towards the lower item index).
pub fn ud_to_binary(v: &Valuation, n: usize) -> Result<Valuation, ModelError> {
    if v.kind != ValuationKind::UnitDemand {
        return Err(ModelError::WrongKind { expected: "unit-demand" });
    }
    if v.m() < n {
        return Err(ModelError::TooFewItems { m: v.m(), n });
    }
    let top = v.ranked_items();
    Ok(Valuation::binary(v.m(), top.into_iter().take(n)))
}

/// `n` agents with valuations over the same `m` items and scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    valuations: Vec<Valuation>,
}

impl Instance {
    pub fn new(valuations: Vec<Valuation>) -> Result<Self, ModelError> {
        let first = valuations.first().ok_or(ModelError::Empty)?;
        let (m, scale, kind) = (first.m(), first.scale, first.kind);
        if m == 0 {
            return Err(ModelError::Empty);
        }
        for (agent, v) in valuations.iter().enumerate() {
            if v.m() != m {
                return Err(ModelError::ShapeMismatch { agent, got: v.m(), expected: m });
            }
            if v.scale != scale {
                return Err(ModelError::ScaleMismatch { agent });
            }
            if v.kind != kind {
                return Err(ModelError::MixedKinds);
            }
        }
        Ok(Instance { valuations })
    }

    /// Build an instance, normalizing mixed additive classes to plain additive.
    pub fn new_normalized(mut valuations: Vec<Valuation>) -> Result<Self, ModelError> {
        let mixed = valuations.windows(2).any(|w| w[0].kind != w[1].kind);
        if mixed {
            if valuations.iter().any(|v| v.kind == ValuationKind::UnitDemand) {
                return Err(ModelError::MixedKinds);
            }
            for v in &mut valuations {
                v.kind = ValuationKind::Additive;
            }
        }
        Instance::new(valuations)
    }

    pub fn n(&self) -> usize {
        self.valuations.len()
    }

    pub fn m(&self) -> usize {
        self.valuations[0].m()
    }

    pub fn kind(&self) -> ValuationKind {
        self.valuations[0].kind
    }

    pub fn scale(&self) -> u64 {
        self.valuations[0].scale
    }

    pub fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }

    pub fn valuation(&self, agent: usize) -> &Valuation {
        &self.valuations[agent]
    }

    pub fn is_identical(&self) -> bool {
        self.valuations.windows(2).all(|w| w[0] == w[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn value_of_sum_and_max() {
        let add = Valuation::additive(vec![3, 7, 2]);
        assert_eq!(add.value_of(&[0, 1]).unwrap(), Value::from_integer(10));
        let ud = Valuation::unit_demand(vec![3, 7, 2]);
        assert_eq!(ud.value_of(&[0, 2]).unwrap(), Value::from_integer(3));
        assert_eq!(ud.value_of(&[]).unwrap(), Value::from_integer(0));
        assert_eq!(add.value_of(&[]).unwrap(), Value::from_integer(0));
    }

    #[test]
    fn value_of_rejects_bad_index() {
        let add = Valuation::additive(vec![1, 2]);
        assert_eq!(add.value_of(&[2]), Err(ModelError::ItemOutOfRange { index: 2, m: 2 }));
    }

    #[test]
    fn reduction_top_n_with_index_ties() {
        let ones = |v: Valuation| -> Vec<usize> { (0..v.m()).filter(|&e| v.item(e) == 1).collect() };
        assert_eq!(ones(ud_to_binary(&Valuation::unit_demand(vec![5, 9, 9, 1]), 2).unwrap()), [1, 2]);
        assert_eq!(ones(ud_to_binary(&Valuation::unit_demand(vec![1, 1, 1]), 3).unwrap()), [0, 1, 2]);
        assert_eq!(ones(ud_to_binary(&Valuation::unit_demand(vec![7, 7, 7, 7]), 2).unwrap()), [0, 1]);
        assert_eq!(ud_to_binary(&Valuation::unit_demand(vec![1, 2]), 3), Err(ModelError::TooFewItems { m: 2, n: 3 }));
        assert!(ud_to_binary(&Valuation::additive(vec![1, 2]), 1).is_err());
    }

    #[test]
    fn class_invariants() {
        assert!(Valuation::new(ValuationKind::BinaryAdditive, vec![0, 3, 3], 3).is_ok());
        assert!(Valuation::new(ValuationKind::BinaryAdditive, vec![0, 1, 3], 3).is_err());
        let tv = ValuationKind::TwoValued { high: 5, low: 1 };
        assert!(Valuation::new(tv, vec![5, 1, 1], 5).is_ok());
        assert!(Valuation::new(tv, vec![5, 2], 5).is_err());
        let bad = ValuationKind::TwoValued { high: 1, low: 1 };
        assert_eq!(Valuation::new(bad, vec![1], 1), Err(ModelError::BadTwoValues { high: 1, low: 1 }));
        assert_eq!(Valuation::new(ValuationKind::Additive, vec![1], 0), Err(ModelError::ZeroScale));
    }

    #[test]
    fn instance_shape_checks() {
        let a = Valuation::additive(vec![1, 2]);
        let b = Valuation::additive(vec![1]);
        assert!(matches!(Instance::new(vec![a.clone(), b]), Err(ModelError::ShapeMismatch { .. })));
        assert_eq!(Instance::new(vec![]), Err(ModelError::Empty));
        let bin = Valuation::binary(2, [0]);
        assert_eq!(Instance::new(vec![a.clone(), bin.clone()]), Err(ModelError::MixedKinds));
        let norm = Instance::new_normalized(vec![a, bin]).unwrap();
        assert_eq!(norm.kind(), ValuationKind::Additive);
    }
}
