use super::{Ball, SizeEstimate, SketchContext, SketchError, StoreKind};
use crate::graph::VertexId;

/// 2^64 as a float, for mapping hash values into (0, 1].
const HASH_RANGE: f64 = 18_446_744_073_709_551_616.0;

/// K-minimum-values counter: the `capacity` smallest distinct hash values of
/// the represented set, kept sorted ascending.
#[derive(Debug, PartialEq, Eq)]
pub struct KmvSketch {
    capacity: usize,
    seed: u64,
    values: Vec<u64>,
}

impl KmvSketch {
    /// `seed` identifies the hash family feeding this sketch; merges across
    /// different seeds are rejected by `try_merge`.
    pub fn new(capacity: usize, seed: u64) -> Self {
        assert!(capacity >= 2, "KMV capacity must be at least 2");
        Self {
            capacity,
            seed,
            values: Vec::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// True while fewer than `capacity` distinct items have been seen, in
    /// which case the sketch holds every hash and counts exactly.
    pub fn is_exact(&self) -> bool {
        self.values.len() < self.capacity
    }

    /// Offers one pre-hashed item.
    #[inline]
    pub fn insert_hash(&mut self, h: u64) {
        let full = self.values.len() == self.capacity;
        if full && h >= self.values[self.capacity - 1] {
            return;
        }
        if let Err(pos) = self.values.binary_search(&h) {
            if full {
                self.values.pop();
            }
            self.values.insert(pos, h);
        }
    }

    /// (s-1)/v_s once saturated, where v_s is the largest retained value
    /// mapped to (0, 1] by (H+1)/2^64.
    pub fn estimate(&self) -> f64 {
        if self.is_exact() {
            return self.values.len() as f64;
        }
        let vs = (self.values[self.capacity - 1] as f64 + 1.0) / HASH_RANGE;
        (self.capacity - 1) as f64 / vs
    }
}

impl Clone for KmvSketch {
    // Keeps the full capacity so a cloned sketch never reallocates.
    fn clone(&self) -> Self {
        let mut values = Vec::with_capacity(self.capacity);
        values.extend_from_slice(&self.values);
        Self {
            capacity: self.capacity,
            seed: self.seed,
            values,
        }
    }
}

const STACK_MERGE: usize = 128;
/// Below this many candidates, single insertions beat a full merge.
const FEW: usize = 4;

/// Smallest distinct values of two ascending, internally distinct slices,
/// written to `out` until it is full. Returns the count written.
fn merge_sorted(a: &[u64], b: &[u64], out: &mut [u64]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while n < out.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => {
                i += (x <= y) as usize;
                j += (y <= x) as usize;
                x.min(y)
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => break,
        };
        out[n] = x;
        n += 1;
    }
    n
}

impl Ball for KmvSketch {
    type Digest = u64;
    const KIND: StoreKind = StoreKind::Kmv;

    fn empty(ctx: &SketchContext) -> Self {
        Self::new(ctx.kmv_size(), ctx.kmv_family().seed())
    }

    #[inline]
    fn digest(v: VertexId, ctx: &SketchContext) -> u64 {
        ctx.kmv_family().hash(v)
    }

    #[inline]
    fn insert_digest(&mut self, h: &u64) {
        self.insert_hash(*h);
    }

    fn union_with(&mut self, other: &Self) {
        debug_assert_eq!(self.seed, other.seed);
        let cap = self.capacity;
        if other.values.is_empty() {
            return;
        }
        let mut take = other.values.len();
        if self.values.len() == cap {
            // Saturated: only values below the current maximum can enter.
            let max = self.values[cap - 1];
            take = other.values.partition_point(|&h| h < max);
            if take <= FEW {
                for &h in &other.values[..take] {
                    self.insert_hash(h);
                }
                return;
            }
        }
        let other = &other.values[..take];
        if cap <= STACK_MERGE {
            let mut buf = [0u64; STACK_MERGE];
            let n = merge_sorted(&self.values, other, &mut buf[..cap]);
            self.values.clear();
            self.values.extend_from_slice(&buf[..n]);
        } else {
            let mut buf = vec![0u64; cap];
            let n = merge_sorted(&self.values, other, &mut buf);
            buf.truncate(n);
            self.values = buf;
        }
    }

    fn try_merge(&mut self, other: &Self) -> Result<(), SketchError> {
        if self.capacity != other.capacity {
            return Err(SketchError::SizeMismatch {
                left: self.capacity,
                right: other.capacity,
            });
        }
        if self.seed != other.seed {
            return Err(SketchError::SeedMismatch {
                left: self.seed,
                right: other.seed,
            });
        }
        self.union_with(other);
        Ok(())
    }
}

impl SizeEstimate for KmvSketch {
    fn estimate_size(&self) -> f64 {
        self.estimate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::StoreSpec;

    fn ctx() -> SketchContext {
        SketchContext::new(StoreSpec::Kmv { size: 32 }, 99)
    }

    #[test]
    fn empty_estimates_zero() {
        assert_eq!(KmvSketch::empty(&ctx()).estimate(), 0.0);
    }

    #[test]
    fn below_capacity_is_exact() {
        let ctx = ctx();
        let mut sk = KmvSketch::empty(&ctx);
        for i in 0..10 {
            sk.insert(VertexId(i), &ctx);
            sk.insert(VertexId(i), &ctx);
        }
        assert!(sk.is_exact());
        assert_eq!(sk.estimate(), 10.0);
    }

    #[test]
    fn insert_is_idempotent() {
        let ctx = ctx();
        let mut a = KmvSketch::empty(&ctx);
        a.insert(VertexId(3), &ctx);
        let once = a.clone();
        a.insert(VertexId(3), &ctx);
        assert_eq!(a, once);
    }

    #[test]
    fn values_stay_sorted_and_bounded() {
        let ctx = ctx();
        let mut sk = KmvSketch::empty(&ctx);
        for i in (0..1000).rev() {
            sk.insert(VertexId(i), &ctx);
            assert!(sk.values().len() <= 32);
            assert!(sk.values().windows(2).all(|w| w[0] < w[1]));
        }
        assert!(!sk.is_exact());
    }

    #[test]
    fn saturated_estimate_formula() {
        let mut sk = KmvSketch::new(2, 0);
        sk.insert_hash(0);
        sk.insert_hash((1u64 << 63) - 1);
        // v_2 = 2^63 / 2^64 = 1/2, so the estimate is (2-1)/(1/2) = 2.
        assert_eq!(sk.estimate(), 2.0);
    }

    #[test]
    fn merge_rejects_foreign_sketches() {
        let mut a = KmvSketch::new(32, 1);
        assert_eq!(
            a.try_merge(&KmvSketch::new(32, 2)),
            Err(SketchError::SeedMismatch { left: 1, right: 2 })
        );
        assert_eq!(
            a.try_merge(&KmvSketch::new(16, 1)),
            Err(SketchError::SizeMismatch {
                left: 32,
                right: 16
            })
        );
    }
}
