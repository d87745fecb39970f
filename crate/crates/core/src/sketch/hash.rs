use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::VertexId;

/// Simple tabulation hashing of 32-bit vertex ids to 64-bit values.
///
/// The four byte tables are filled from a ChaCha stream keyed by `seed`, so
/// the mapping is a pure function of the seed.
#[derive(Clone)]
pub struct HashFamily {
    seed: u64,
    tables: Box<[[u64; 256]; 4]>,
}

impl HashFamily {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tables = Box::new([[0u64; 256]; 4]);
        for table in tables.iter_mut() {
            for slot in table.iter_mut() {
                *slot = rng.next_u64();
            }
        }
        Self { seed, tables }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn hash(&self, v: VertexId) -> u64 {
        let x = v.0;
        let t = &self.tables;
        t[0][(x & 0xff) as usize]
            ^ t[1][((x >> 8) & 0xff) as usize]
            ^ t[2][((x >> 16) & 0xff) as usize]
            ^ t[3][(x >> 24) as usize]
    }
}

impl std::fmt::Debug for HashFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HashFamily")
            .field("seed", &self.seed)
            .finish()
    }
}

/// Stream tags used when splitting one experiment seed into sub-seeds.
pub(crate) mod stream {
    pub const KMV: u64 = 1;
    pub const MINHASH: u64 = 2;
    pub const ENGINE: u64 = 3;
    pub const SAMPLING: u64 = 4;
}

/// Splits `master` into `count` sub-seeds on an independent ChaCha stream.
/// The i-th seed only depends on `(master, stream, i)`.
pub fn derive_seeds(master: u64, stream: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    (0..count).map(|_| rng.next_u64()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = HashFamily::new(7);
        let b = HashFamily::new(7);
        let c = HashFamily::new(8);
        for i in [0u32, 1, 255, 256, 70_000, u32::MAX] {
            assert_eq!(a.hash(VertexId(i)), b.hash(VertexId(i)));
            assert_ne!(a.hash(VertexId(i)), c.hash(VertexId(i)));
        }
    }

    #[test]
    fn derived_seeds_are_prefix_stable() {
        let short = derive_seeds(42, stream::MINHASH, 3);
        let long = derive_seeds(42, stream::MINHASH, 10);
        assert_eq!(short[..], long[..3]);
        assert_ne!(
            derive_seeds(42, stream::KMV, 1),
            derive_seeds(42, stream::MINHASH, 1)
        );
    }

    #[test]
    fn top_bit_is_balanced() {
        let h = HashFamily::new(3);
        let ones = (0..10_000u32)
            .filter(|&i| h.hash(VertexId(i)) >> 63 == 1)
            .count();
        // Binomial(10000, 1/2): sd = 50.
        assert!((ones as i64 - 5000).abs() < 250, "{ones}");
    }
}
