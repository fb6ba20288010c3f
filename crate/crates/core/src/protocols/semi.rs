use alloc::vec::Vec;
use core::ops::Range;

use crate::model::Allocation;

use super::ProtocolError;

/// Consecutive blocks (one per agent, possibly empty) plus up to `n`
/// designated holes. An agent receives her block minus the holes, and at most
/// one hole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiContiguousAllocation {
    pub blocks: Vec<Range<usize>>,
    pub holes: Vec<usize>,
    pub hole_of: Vec<Option<usize>>,
    pub m: usize,
}

impl SemiContiguousAllocation {
    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    /// Check the structural invariants.
    pub fn validate(&self) -> Result<(), ProtocolError> {
        let n = self.n();
        let bad = |msg| Err(ProtocolError::Structure(msg));
        if self.hole_of.len() != n {
            return bad("hole assignment length differs from block count");
        }
        if self.holes.len() > n {
            return bad("more holes than agents");
        }
        let mut is_hole = alloc::vec![false; self.m];
        for &h in &self.holes {
            if h >= self.m || is_hole[h] {
                return bad("hole out of range or repeated");
            }
            is_hole[h] = true;
        }
        let mut assigned: Vec<usize> = self.hole_of.iter().flatten().copied().collect();
        assigned.sort_unstable();
        let mut holes = self.holes.clone();
        holes.sort_unstable();
        if assigned != holes {
            return bad("holes and hole assignment differ");
        }
        let mut spans: Vec<&Range<usize>> = self.blocks.iter().filter(|b| !b.is_empty()).collect();
        spans.sort_by_key(|b| b.start);
        let mut at = 0;
        for b in spans {
            if b.start != at {
                return bad("blocks are not consecutive");
            }
            at = b.end;
        }
        if at != self.m || self.blocks.iter().any(|b| b.start > b.end || b.end > self.m) {
            return bad("blocks do not cover the items");
        }
        Ok(())
    }

    pub fn to_allocation(&self) -> Result<Allocation, ProtocolError> {
        self.validate()?;
        let mut owner = alloc::vec![usize::MAX; self.m];
        for (agent, b) in self.blocks.iter().enumerate() {
            for e in b.clone() {
                owner[e] = agent;
            }
        }
        for (agent, h) in self.hole_of.iter().enumerate() {
            if let Some(h) = *h {
                owner[h] = agent;
            }
        }
        Ok(Allocation::new(self.n(), owner)?)
    }

    /// Build from per-agent ranges `[lo, hi)` over `line` (ascending item
    /// indices, the non-hole items). Agents without a range get an empty
    /// block; the block ending last is stretched to cover the tail.
    pub(crate) fn from_line(
        m: usize,
        line: &[usize],
        ranges: &[Option<(usize, usize)>],
        holes: Vec<usize>,
        hole_of: Vec<Option<usize>>,
    ) -> Self {
        let n = ranges.len();
        let boundary = |p: usize| {
            if p == 0 {
                0
            } else if p >= line.len() {
                m
            } else {
                line[p]
            }
        };
        let mut blocks: Vec<Range<usize>> = alloc::vec![0..0; n];
        let mut order: Vec<usize> = (0..n).filter(|&a| ranges[a].is_some()).collect();
        order.sort_by_key(|&a| ranges[a]);
        for &a in &order {
            let (lo, hi) = ranges[a].expect("filtered");
            let start = boundary(lo);
            blocks[a] = start..boundary(hi).max(start);
        }
        match order.last() {
            Some(&last) => blocks[last].end = m,
            None if n > 0 => blocks[0] = 0..m,
            None => {}
        }
        SemiContiguousAllocation { blocks, holes, hole_of, m }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn flatten_and_validate() {
        // Items 0..6, holes {1, 4}; agent 2 holds hole 4 and an empty block.
        let s = SemiContiguousAllocation {
            blocks: vec![0..3, 3..6, 0..0],
            holes: vec![1, 4],
            hole_of: vec![Some(1), None, Some(4)],
            m: 6,
        };
        let a = s.to_allocation().unwrap();
        assert_eq!(a.owner(), &[0, 0, 0, 1, 2, 1]);
        let gap = SemiContiguousAllocation { blocks: vec![0..2, 3..6], holes: vec![], hole_of: vec![None, None], m: 6 };
        assert!(gap.validate().is_err());
        let stray = SemiContiguousAllocation { blocks: vec![0..6], holes: vec![2], hole_of: vec![None], m: 6 };
        assert!(stray.validate().is_err());
    }

    #[test]
    fn from_line_covers() {
        // Non-hole line [0, 2, 3, 5], holes 1 and 4.
        let line = [0, 2, 3, 5];
        let s = SemiContiguousAllocation::from_line(
            6,
            &line,
            &[Some((0, 2)), Some((2, 4)), None],
            vec![1, 4],
            vec![None, Some(1), Some(4)],
        );
        assert_eq!(s.blocks, vec![0..3, 3..6, 0..0]);
        s.validate().unwrap();
    }
}
