use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a seed with a label and an index into a new 64-bit seed.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in label.as_bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(splitmix64(seed ^ h) ^ splitmix64(index.wrapping_add(h)))
}

/// Common random string: a master seed from which every party derives the
/// same labelled random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Crs {
    seed: u64,
}

impl Crs {
    pub fn new(seed: u64) -> Self {
        Crs { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child string, e.g. one per trial.
    pub fn child(&self, label: &str, index: u64) -> Crs {
        Crs { seed: derive_seed(self.seed, label, index) }
    }

    pub fn stream(&self, label: &str) -> ChaCha8Rng {
        self.stream_at(label, 0)
    }

    pub fn stream_at(&self, label: &str, index: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_seed(self.seed, label, index))
    }

    /// Uniform permutation of `0..len`.
    pub fn permutation(&self, label: &str, len: usize) -> Vec<usize> {
        self.permutation_at(label, 0, len)
    }

    pub fn permutation_at(&self, label: &str, index: u64, len: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..len).collect();
        p.shuffle(&mut self.stream_at(label, index));
        p
    }
}
