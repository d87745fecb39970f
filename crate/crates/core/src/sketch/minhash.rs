use super::{Ball, JaccardEstimate, SketchContext, SketchError, StoreKind};
use crate::graph::VertexId;

/// One minimum per hash function; `u64::MAX` marks an empty coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinHashSignature {
    seed: u64,
    mins: Vec<u64>,
}

impl MinHashSignature {
    pub fn new(hashes: usize, seed: u64) -> Self {
        Self {
            seed,
            mins: vec![u64::MAX; hashes],
        }
    }

    pub fn mins(&self) -> &[u64] {
        &self.mins
    }

    pub fn hashes(&self) -> usize {
        self.mins.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Offers the per-function hash values of one item.
    #[inline]
    pub fn insert_hashes(&mut self, hashes: &[u64]) {
        debug_assert_eq!(hashes.len(), self.mins.len());
        for (m, &h) in self.mins.iter_mut().zip(hashes) {
            if h < *m {
                *m = h;
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<(), SketchError> {
        if self.mins.len() != other.mins.len() {
            return Err(SketchError::SizeMismatch {
                left: self.mins.len(),
                right: other.mins.len(),
            });
        }
        if self.seed != other.seed {
            return Err(SketchError::SeedMismatch {
                left: self.seed,
                right: other.seed,
            });
        }
        Ok(())
    }

    /// Fraction of coordinates on which the two signatures agree.
    pub fn jaccard(&self, other: &Self) -> Result<f64, SketchError> {
        self.check_compatible(other)?;
        if self.mins.is_empty() {
            return Ok(0.0);
        }
        let matches = self
            .mins
            .iter()
            .zip(&other.mins)
            .filter(|(a, b)| a == b)
            .count();
        Ok(matches as f64 / self.mins.len() as f64)
    }
}

impl Ball for MinHashSignature {
    type Digest = Vec<u64>;
    const KIND: StoreKind = StoreKind::MinHash;

    fn empty(ctx: &SketchContext) -> Self {
        // The first family seed stands in for the whole family.
        let families = ctx.minhash_families();
        let seed = families.first().map_or(ctx.seed(), |f| f.seed());
        Self::new(families.len(), seed)
    }

    fn digest(v: VertexId, ctx: &SketchContext) -> Vec<u64> {
        ctx.minhash_families().iter().map(|f| f.hash(v)).collect()
    }

    #[inline]
    fn insert_digest(&mut self, hashes: &Vec<u64>) {
        self.insert_hashes(hashes);
    }

    fn union_with(&mut self, other: &Self) {
        debug_assert_eq!(self.seed, other.seed);
        self.insert_hashes(&other.mins);
    }

    fn try_merge(&mut self, other: &Self) -> Result<(), SketchError> {
        self.check_compatible(other)?;
        self.union_with(other);
        Ok(())
    }
}

impl JaccardEstimate for MinHashSignature {
    fn estimate_jaccard(&self, other: &Self) -> Result<f64, SketchError> {
        self.jaccard(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::StoreSpec;

    #[test]
    fn insert_sets_every_coordinate() {
        let ctx = SketchContext::new(StoreSpec::minhash(), 5);
        let mut sig = MinHashSignature::empty(&ctx);
        assert!(sig.mins().iter().all(|&m| m == u64::MAX));
        sig.insert(VertexId(17), &ctx);
        let expected = MinHashSignature::digest(VertexId(17), &ctx);
        assert_eq!(sig.mins(), &expected[..]);
    }

    #[test]
    fn identical_signatures_score_one() {
        let ctx = SketchContext::new(StoreSpec::minhash(), 5);
        let mut a = MinHashSignature::empty(&ctx);
        for i in 0..50 {
            a.insert(VertexId(i), &ctx);
        }
        assert_eq!(a.jaccard(&a.clone()).unwrap(), 1.0);
    }

    #[test]
    fn mismatched_signatures_are_rejected() {
        let a = MinHashSignature::new(100, 1);
        assert!(matches!(
            a.jaccard(&MinHashSignature::new(50, 1)),
            Err(SketchError::SizeMismatch { .. })
        ));
        let mut b = MinHashSignature::new(100, 2);
        assert!(matches!(
            b.try_merge(&a),
            Err(SketchError::SeedMismatch { .. })
        ));
    }
}
