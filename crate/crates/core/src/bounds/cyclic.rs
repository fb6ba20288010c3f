//! The cyclic allocations for unit-demand instances with `m = n + 1`.
//!
//! For rotation `j` in `1..=n`, agent `a < n - 1` gets item
//! `(a + 1 + j) mod (n + 1)` and the last agent gets the two remaining items.
//! Each of the first `n - 1` agents rules out only the rotation that hands
//! her the bottom item, so some rotation serves everyone and naming it costs
//! `ceil(log2 n)` bits.

use alloc::vec::Vec;

use super::{description_bits, BoundsError};
use crate::model::{ud_to_binary, Allocation, Instance, ValuationKind};
use crate::shares::{check, FairnessNotion};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicAllocation {
    pub rotation: usize,
    pub allocation: Allocation,
    pub description_bits: u32,
}

/// The cyclic allocation with rotation `j` for `n` agents and `n + 1` items.
pub fn cyclic_allocation(n: usize, j: usize) -> Allocation {
    let m = n + 1;
    let mut owner = alloc::vec![n - 1; m];
    for (a, slot) in (0..n - 1).map(|a| (a, (a + 1 + j) % m)) {
        owner[slot] = a;
    }
    Allocation::new(n, owner).expect("owners are in range")
}

/// First rotation whose allocation gives every agent her maximin share,
/// checked on the binary image of the instance.
pub fn cyclic_mms_dc(inst: &Instance) -> Result<CyclicAllocation, BoundsError> {
    let n = inst.n();
    if inst.m() != n + 1 {
        return Err(BoundsError::Precondition("the cyclic construction needs m = n + 1"));
    }
    if inst.kind() != ValuationKind::UnitDemand {
        return Err(BoundsError::Precondition("the cyclic construction needs unit-demand valuations"));
    }
    let image = Instance::new(inst.valuations().iter().map(|v| ud_to_binary(v, n)).collect::<Result<Vec<_>, _>>()?)?;
    for j in 1..=n {
        let allocation = cyclic_allocation(n, j);
        if check(&image, &allocation, FairnessNotion::Mms)?.iter().all(|v| v.pass) {
            return Ok(CyclicAllocation { rotation: j, allocation, description_bits: description_bits(n) });
        }
    }
    Err(BoundsError::NoRotation)
}
