use std::collections::HashSet;

use super::{Ball, JaccardEstimate, SizeEstimate, SketchContext, SketchError, StoreKind};
use crate::graph::VertexId;

/// Lossless ball: the literal member set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExactBall {
    members: HashSet<VertexId>,
}

impl ExactBall {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn members(&self) -> &HashSet<VertexId> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.contains(&v)
    }

    pub fn add(&mut self, v: VertexId) {
        self.members.insert(v);
    }
}

impl FromIterator<VertexId> for ExactBall {
    fn from_iter<I: IntoIterator<Item = VertexId>>(iter: I) -> Self {
        Self {
            members: iter.into_iter().collect(),
        }
    }
}

impl Ball for ExactBall {
    type Digest = VertexId;
    const KIND: StoreKind = StoreKind::Exact;

    fn empty(_ctx: &SketchContext) -> Self {
        Self::new()
    }

    #[inline]
    fn digest(v: VertexId, _ctx: &SketchContext) -> VertexId {
        v
    }

    #[inline]
    fn insert_digest(&mut self, v: &VertexId) {
        self.members.insert(*v);
    }

    fn union_with(&mut self, other: &Self) {
        self.members.extend(other.members.iter().copied());
    }

    fn try_merge(&mut self, other: &Self) -> Result<(), SketchError> {
        self.union_with(other);
        Ok(())
    }
}

impl SizeEstimate for ExactBall {
    fn estimate_size(&self) -> f64 {
        self.members.len() as f64
    }
}

impl JaccardEstimate for ExactBall {
    fn estimate_jaccard(&self, other: &Self) -> Result<f64, SketchError> {
        Ok(jaccard(&self.members, &other.members))
    }
}

/// Exact Jaccard similarity; two empty sets are taken to be identical.
pub fn jaccard(a: &HashSet<VertexId>, b: &HashSet<VertexId>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let inter = small.iter().filter(|v| large.contains(v)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(items: &[u32]) -> ExactBall {
        items.iter().map(|&i| VertexId(i)).collect()
    }

    #[test]
    fn insert_and_merge() {
        let ctx = SketchContext::new(super::super::StoreSpec::Exact, 0);
        let mut b = ExactBall::empty(&ctx);
        assert_eq!(b.len(), 0);
        b.insert(VertexId(5), &ctx);
        assert_eq!(b, set(&[5]));

        let mut a = set(&[1, 2]);
        a.union_with(&set(&[2, 3]));
        assert_eq!(a, set(&[1, 2, 3]));
        assert_eq!(a.len(), 3);

        let snapshot = a.clone();
        a.union_with(&snapshot);
        assert_eq!(a, snapshot);
    }

    #[test]
    fn size_counts_distinct_inserts() {
        let ctx = SketchContext::new(super::super::StoreSpec::Exact, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut reference = std::collections::BTreeSet::new();
        let mut b = ExactBall::new();
        for _ in 0..100 {
            let v = rng.random_range(0..40u32);
            reference.insert(v);
            b.insert(VertexId(v), &ctx);
        }
        assert_eq!(b.len(), reference.len());
    }

    #[test]
    fn exact_jaccard() {
        assert_eq!(set(&[1, 2]).estimate_jaccard(&set(&[1, 2])).unwrap(), 1.0);
        assert_eq!(set(&[1]).estimate_jaccard(&set(&[2])).unwrap(), 0.0);
        assert_eq!(
            set(&[1, 2, 3]).estimate_jaccard(&set(&[2, 3, 4])).unwrap(),
            0.5
        );
    }
}
