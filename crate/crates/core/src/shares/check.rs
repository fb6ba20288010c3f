use alloc::vec::Vec;

use super::oracle::{mms_share, mxs_exact, tps};
use super::{default_rho, FairnessNotion, ShareError};
use crate::model::{Allocation, Instance, Valuation, ValuationKind, Value};

/// Why an agent passed or failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Witness {
    /// The own bundle meets the threshold by itself.
    Met,
    /// An outside item (the best one for the agent) used by Prop1.
    Item(usize),
    /// First agent whose bundle violates an envy condition, optionally with
    /// the removed item that still leaves envy.
    Pair { other: usize, item: Option<usize> },
    /// The own bundle falls short and nothing can compensate.
    Short,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AgentVerdict {
    pub agent: usize,
    pub pass: bool,
    pub witness: Witness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvyNotion {
    Ef,
    Ef1,
    Efx,
    Eqx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShareNotion {
    Mms,
    RhoMms(Value),
    Mxs,
}

fn bundles_of(inst: &Instance, alloc: &Allocation) -> Result<Vec<Vec<usize>>, ShareError> {
    if alloc.m() != inst.m() {
        return Err(ShareError::AllocationShape { got: alloc.m(), expected: inst.m() });
    }
    if alloc.n() != inst.n() {
        return Err(ShareError::AgentCount { got: alloc.n(), expected: inst.n() });
    }
    Ok(alloc.bundles())
}

fn check_rho(rho: Value) -> Result<(), ShareError> {
    if rho > Value::from_integer(0) && rho <= Value::from_integer(1) {
        Ok(())
    } else {
        Err(ShareError::BadRho)
    }
}

pub fn check_prop1(inst: &Instance, alloc: &Allocation, strict: bool) -> Result<Vec<AgentVerdict>, ShareError> {
    if !inst.kind().is_additive() {
        return Err(ShareError::WrongKind { expected: "additive", got: inst.kind().name() });
    }
    let bundles = bundles_of(inst, alloc)?;
    let n = inst.n() as u128;
    Ok(inst
        .valuations()
        .iter()
        .enumerate()
        .map(|(agent, v)| {
            let own = v.raw_value(bundles[agent].iter().copied());
            let total = v.raw_total();
            if own * n >= total {
                return AgentVerdict { agent, pass: true, witness: Witness::Met };
            }
            let best = (0..v.m())
                .filter(|&e| alloc.owner_of(e) != agent)
                .max_by(|&a, &b| v.item(a).cmp(&v.item(b)).then(b.cmp(&a)));
            match best {
                None => AgentVerdict { agent, pass: false, witness: Witness::Short },
                Some(e) => {
                    let with = (own + v.item(e) as u128) * n;
                    let pass = if strict { with > total } else { with >= total };
                    AgentVerdict { agent, pass, witness: Witness::Item(e) }
                }
            }
        })
        .collect())
}

pub fn check_rho_tps(inst: &Instance, alloc: &Allocation, rho: Value) -> Result<Vec<AgentVerdict>, ShareError> {
    check_rho(rho)?;
    let bundles = bundles_of(inst, alloc)?;
    let n = inst.n();
    inst.valuations()
        .iter()
        .enumerate()
        .map(|(agent, v)| {
            let own = v.to_value(v.raw_value(bundles[agent].iter().copied()));
            let pass = own >= rho * tps(v, n)?;
            Ok(AgentVerdict { agent, pass, witness: if pass { Witness::Met } else { Witness::Short } })
        })
        .collect()
}

/// Least and largest value of a non-empty bundle after removing one item,
/// with the removed item that attains the largest value.
fn after_removal(v: &Valuation, bundle: &[usize]) -> (u128, u128, usize) {
    let mut by_value: Vec<usize> = bundle.to_vec();
    by_value.sort_by(|&a, &b| v.item(b).cmp(&v.item(a)).then(a.cmp(&b)));
    let top = v.item(by_value[0]) as u128;
    let bottom_item = *by_value.last().expect("non-empty bundle");
    match v.kind() {
        ValuationKind::UnitDemand => {
            let second = by_value.get(1).map_or(0, |&e| v.item(e) as u128);
            let largest = if by_value.len() >= 2 { top } else { 0 };
            (second, largest, bottom_item)
        }
        _ => {
            let sum = v.raw_value(bundle.iter().copied());
            (sum - top, sum - v.item(bottom_item) as u128, bottom_item)
        }
    }
}

pub fn check_envy(inst: &Instance, alloc: &Allocation, notion: EnvyNotion) -> Result<Vec<AgentVerdict>, ShareError> {
    let bundles = bundles_of(inst, alloc)?;
    let vals = inst.valuations();
    Ok((0..inst.n())
        .map(|agent| {
            let own = vals[agent].raw_value(bundles[agent].iter().copied());
            for (other, bundle) in bundles.iter().enumerate() {
                if other == agent || bundle.is_empty() {
                    continue;
                }
                // Envy is judged with the agent's valuation, except EQX which
                // uses the other agent's valuation of her own bundle.
                let judge = if notion == EnvyNotion::Eqx { &vals[other] } else { &vals[agent] };
                let full = judge.raw_value(bundle.iter().copied());
                if own >= full {
                    continue;
                }
                let (least, largest, item) = after_removal(judge, bundle);
                let violation = match notion {
                    EnvyNotion::Ef => Some(None),
                    EnvyNotion::Ef1 => (own < least).then_some(None),
                    EnvyNotion::Efx | EnvyNotion::Eqx => (own < largest).then_some(Some(item)),
                };
                if let Some(item) = violation {
                    return AgentVerdict { agent, pass: false, witness: Witness::Pair { other, item } };
                }
            }
            AgentVerdict { agent, pass: true, witness: Witness::Met }
        })
        .collect())
}

pub fn check_share(inst: &Instance, alloc: &Allocation, notion: ShareNotion) -> Result<Vec<AgentVerdict>, ShareError> {
    let bundles = bundles_of(inst, alloc)?;
    let n = inst.n();
    let rho = match notion {
        ShareNotion::RhoMms(rho) => {
            check_rho(rho)?;
            rho
        }
        _ => Value::from_integer(1),
    };
    inst.valuations()
        .iter()
        .enumerate()
        .map(|(agent, v)| {
            let share = match notion {
                ShareNotion::Mxs => mxs_exact(v, n)?,
                _ => mms_share(v, n)?,
            };
            let own = v.to_value(v.raw_value(bundles[agent].iter().copied()));
            let pass = own >= rho * share;
            Ok(AgentVerdict { agent, pass, witness: if pass { Witness::Met } else { Witness::Short } })
        })
        .collect()
}

/// Strict Prop1 together with `n / (2n - 1)`-TPS.
pub fn check_aprop(inst: &Instance, alloc: &Allocation) -> Result<Vec<AgentVerdict>, ShareError> {
    let prop1 = check_prop1(inst, alloc, true)?;
    let tps = check_rho_tps(inst, alloc, default_rho(inst.n()))?;
    Ok(prop1.into_iter().zip(tps).map(|(p, t)| if p.pass { t } else { p }).collect())
}

pub fn check(inst: &Instance, alloc: &Allocation, notion: FairnessNotion) -> Result<Vec<AgentVerdict>, ShareError> {
    match notion {
        FairnessNotion::Prop1Strict => check_prop1(inst, alloc, true),
        FairnessNotion::Prop1Weak => check_prop1(inst, alloc, false),
        FairnessNotion::RhoTps(rho) => check_rho_tps(inst, alloc, rho),
        FairnessNotion::Aprop => check_aprop(inst, alloc),
        FairnessNotion::Ef => check_envy(inst, alloc, EnvyNotion::Ef),
        FairnessNotion::Ef1 => check_envy(inst, alloc, EnvyNotion::Ef1),
        FairnessNotion::Efx => check_envy(inst, alloc, EnvyNotion::Efx),
        FairnessNotion::Eqx => check_envy(inst, alloc, EnvyNotion::Eqx),
        FairnessNotion::Mms => check_share(inst, alloc, ShareNotion::Mms),
        FairnessNotion::RhoMms(rho) => check_share(inst, alloc, ShareNotion::RhoMms(rho)),
        FairnessNotion::Mxs => check_share(inst, alloc, ShareNotion::Mxs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn inst(rows: &[&[u64]]) -> Instance {
        Instance::new(rows.iter().map(|r| Valuation::additive(r.to_vec())).collect()).unwrap()
    }

    fn all_pass(v: &[AgentVerdict]) -> bool {
        v.iter().all(|a| a.pass)
    }

    #[test]
    fn prop1_remark_examples() {
        let i = inst(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]);
        let each = Allocation::new(3, vec![0, 1, 2]).unwrap();
        assert!(all_pass(&check_prop1(&i, &each, true).unwrap()));
        let hoard = Allocation::new(3, vec![0, 0, 0]).unwrap();
        let strict = check_prop1(&i, &hoard, true).unwrap();
        let weak = check_prop1(&i, &hoard, false).unwrap();
        assert!(!strict[1].pass && weak[1].pass);
        let single = inst(&[&[4, 9]]);
        assert!(all_pass(&check_prop1(&single, &Allocation::new(1, vec![0, 0]).unwrap(), true).unwrap()));
    }

    #[test]
    fn rho_tps_quarter_items() {
        // Scale 4: three items worth 1 and four worth 1/4.
        let v = Valuation::new(ValuationKind::Additive, vec![4, 4, 4, 1, 1, 1, 1], 4).unwrap();
        let i = Instance::new(vec![v; 4]).unwrap();
        let rho = default_rho(4);
        let two = Allocation::new(4, vec![0, 1, 2, 3, 3, 0, 0]).unwrap();
        assert!(!check_rho_tps(&i, &two, rho).unwrap()[3].pass);
        let three = Allocation::new(4, vec![0, 1, 2, 3, 3, 3, 0]).unwrap();
        assert!(check_rho_tps(&i, &three, rho).unwrap()[3].pass);
        assert!(!check_aprop(&i, &two).unwrap()[3].pass);
        assert!(check_prop1(&i, &two, true).unwrap()[3].pass);
    }

    #[test]
    fn envy_examples() {
        let i = inst(&[&[1, 2, 1], &[1, 2, 1]]);
        let a = Allocation::new(2, vec![0, 1, 1]).unwrap();
        assert!(check_envy(&i, &a, EnvyNotion::Ef1).unwrap()[0].pass);
        let efx = check_envy(&i, &a, EnvyNotion::Efx).unwrap();
        assert_eq!(efx[0], AgentVerdict { agent: 0, pass: false, witness: Witness::Pair { other: 1, item: Some(2) } });
        let j = inst(&[&[1, 1, 1], &[1, 1, 1]]);
        let lopsided = Allocation::new(2, vec![0, 0, 0]).unwrap();
        assert!(!check_envy(&j, &lopsided, EnvyNotion::Ef1).unwrap()[1].pass);
        let one = inst(&[&[5, 1]]);
        let all = Allocation::new(1, vec![0, 0]).unwrap();
        for notion in [EnvyNotion::Ef, EnvyNotion::Ef1, EnvyNotion::Efx, EnvyNotion::Eqx] {
            assert!(all_pass(&check_envy(&one, &all, notion).unwrap()));
        }
    }

    #[test]
    fn unit_demand_envy_uses_max() {
        let i =
            Instance::new(vec![Valuation::unit_demand(vec![9, 1, 1]), Valuation::unit_demand(vec![1, 9, 1])]).unwrap();
        let a = Allocation::new(2, vec![0, 1, 1]).unwrap();
        assert!(all_pass(&check_envy(&i, &a, EnvyNotion::Ef1).unwrap()));
        assert!(all_pass(&check_envy(&i, &a, EnvyNotion::Efx).unwrap()));
        assert!(check_prop1(&i, &a, true).is_err());
    }

    #[test]
    fn eqx_compares_across_agents() {
        let i = inst(&[&[1, 0, 0], &[0, 5, 5]]);
        let a = Allocation::new(2, vec![0, 1, 1]).unwrap();
        // Agent 0 has 1, agent 1 keeps 5 after losing any item.
        assert!(!check_envy(&i, &a, EnvyNotion::Eqx).unwrap()[0].pass);
        assert!(check_envy(&i, &a, EnvyNotion::Eqx).unwrap()[1].pass);
    }

    #[test]
    fn mms_share_check() {
        let i = inst(&[&[3, 3, 1, 1, 1], &[3, 3, 1, 1, 1], &[3, 3, 1, 1, 1]]);
        let a = Allocation::new(3, vec![0, 1, 0, 1, 2]).unwrap();
        let v = check_share(&i, &a, ShareNotion::Mms).unwrap();
        assert!(v[0].pass && v[1].pass && !v[2].pass);
        let third = ShareNotion::RhoMms(Value::new(1, 3));
        assert!(all_pass(&check_share(&i, &a, third).unwrap()));
        let one = inst(&[&[2, 0]]);
        assert!(check_share(&one, &Allocation::new(1, vec![0, 0]).unwrap(), ShareNotion::Mms).unwrap()[0].pass);
    }

    #[test]
    fn shape_errors() {
        let i = inst(&[&[1, 1]]);
        assert!(check_prop1(&i, &Allocation::new(1, vec![0]).unwrap(), true).is_err());
        assert!(check_envy(&i, &Allocation::new(2, vec![0, 1]).unwrap(), EnvyNotion::Ef).is_err());
        assert_eq!(
            check_rho_tps(&i, &Allocation::new(1, vec![0, 0]).unwrap(), Value::from_integer(2)),
            Err(ShareError::BadRho)
        );
    }
}
