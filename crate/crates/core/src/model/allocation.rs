use alloc::vec::Vec;

use super::ModelError;

/// A total assignment of items to agents. Bundles are the preimages of
/// `owner`; empty bundles are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    n: usize,
    owner: Vec<usize>,
}

impl Allocation {
    pub fn new(n: usize, owner: Vec<usize>) -> Result<Self, ModelError> {
        if let Some(&index) = owner.iter().find(|&&a| a >= n) {
            return Err(ModelError::AgentOutOfRange { index, n });
        }
        Ok(Allocation { n, owner })
    }

    /// Build from explicit bundles; every item in `0..m` must appear exactly once.
    pub fn from_bundles(m: usize, bundles: &[Vec<usize>]) -> Result<Self, ModelError> {
        let mut owner = alloc::vec![usize::MAX; m];
        for (agent, bundle) in bundles.iter().enumerate() {
            for &e in bundle {
                if e >= m || owner[e] != usize::MAX {
                    return Err(ModelError::ItemOutOfRange { index: e, m });
                }
                owner[e] = agent;
            }
        }
        if let Some(index) = owner.iter().position(|&a| a == usize::MAX) {
            return Err(ModelError::ItemOutOfRange { index, m });
        }
        Ok(Allocation { n: bundles.len(), owner })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.owner.len()
    }

    pub fn owner(&self) -> &[usize] {
        &self.owner
    }

    pub fn owner_of(&self, item: usize) -> usize {
        self.owner[item]
    }

    pub fn bundle(&self, agent: usize) -> Vec<usize> {
        (0..self.owner.len()).filter(|&e| self.owner[e] == agent).collect()
    }

    pub fn bundles(&self) -> Vec<Vec<usize>> {
        let mut out = alloc::vec![Vec::new(); self.n];
        for (e, &a) in self.owner.iter().enumerate() {
            out[a].push(e);
        }
        out
    }

    /// Drop padding items `m..` (appended by protocols that pad).
    pub fn truncated(mut self, m: usize) -> Self {
        self.owner.truncate(m);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn bundles_roundtrip() {
        let a = Allocation::from_bundles(4, &[vec![0, 3], vec![], vec![1, 2]]).unwrap();
        assert_eq!(a.owner(), &[0, 2, 2, 0]);
        assert_eq!(a.bundles(), vec![vec![0, 3], vec![], vec![1, 2]]);
        assert!(Allocation::from_bundles(3, &[vec![0, 1]]).is_err());
        assert!(Allocation::from_bundles(2, &[vec![0, 1], vec![1]]).is_err());
        assert!(Allocation::new(2, vec![0, 2]).is_err());
    }
}
