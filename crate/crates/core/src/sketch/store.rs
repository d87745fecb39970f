use std::collections::HashSet;

use super::{
    Ball, ExactBall, JaccardEstimate, KmvSketch, MinHashSignature, SizeEstimate, SketchContext,
    SketchError, StoreKind, StoreSpec,
};
use crate::graph::VertexId;

/// KMV counter and minhash signature maintained side by side, answering both
/// size and similarity queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KmvMinHash {
    pub kmv: KmvSketch,
    pub minhash: MinHashSignature,
}

impl Ball for KmvMinHash {
    type Digest = (u64, Vec<u64>);
    const KIND: StoreKind = StoreKind::KmvMinHash;

    fn empty(ctx: &SketchContext) -> Self {
        Self {
            kmv: KmvSketch::empty(ctx),
            minhash: MinHashSignature::empty(ctx),
        }
    }

    fn digest(v: VertexId, ctx: &SketchContext) -> Self::Digest {
        (KmvSketch::digest(v, ctx), MinHashSignature::digest(v, ctx))
    }

    fn insert_digest(&mut self, d: &Self::Digest) {
        self.kmv.insert_digest(&d.0);
        self.minhash.insert_digest(&d.1);
    }

    fn union_with(&mut self, other: &Self) {
        self.kmv.union_with(&other.kmv);
        self.minhash.union_with(&other.minhash);
    }

    fn try_merge(&mut self, other: &Self) -> Result<(), SketchError> {
        // Validate both halves before touching either.
        self.kmv.clone().try_merge(&other.kmv)?;
        self.minhash.clone().try_merge(&other.minhash)?;
        self.union_with(other);
        Ok(())
    }
}

impl SizeEstimate for KmvMinHash {
    fn estimate_size(&self) -> f64 {
        self.kmv.estimate()
    }
}

impl JaccardEstimate for KmvMinHash {
    fn estimate_jaccard(&self, other: &Self) -> Result<f64, SketchError> {
        self.minhash.jaccard(&other.minhash)
    }
}

/// Runtime-selected store, for callers that pick the representation from
/// configuration rather than at compile time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BallStore {
    Exact(ExactBall),
    Kmv(KmvSketch),
    MinHash(MinHashSignature),
    KmvMinHash(KmvMinHash),
}

#[derive(Clone, Debug)]
pub enum StoreDigest {
    Exact(VertexId),
    Kmv(u64),
    MinHash(Vec<u64>),
    KmvMinHash((u64, Vec<u64>)),
}

impl BallStore {
    pub fn kind(&self) -> StoreKind {
        match self {
            BallStore::Exact(_) => StoreKind::Exact,
            BallStore::Kmv(_) => StoreKind::Kmv,
            BallStore::MinHash(_) => StoreKind::MinHash,
            BallStore::KmvMinHash(_) => StoreKind::KmvMinHash,
        }
    }

    pub fn exact_members(&self) -> Result<&HashSet<VertexId>, SketchError> {
        match self {
            BallStore::Exact(b) => Ok(b.members()),
            other => Err(SketchError::NotExact(other.kind().name())),
        }
    }

    pub fn exact_size(&self) -> Result<usize, SketchError> {
        self.exact_members().map(HashSet::len)
    }

    pub fn estimate_size(&self) -> Result<f64, SketchError> {
        match self {
            BallStore::Exact(b) => Ok(b.estimate_size()),
            BallStore::Kmv(b) => Ok(b.estimate_size()),
            BallStore::KmvMinHash(b) => Ok(b.estimate_size()),
            BallStore::MinHash(_) => Err(SketchError::Unsupported("minhash")),
        }
    }

    pub fn estimate_jaccard(&self, other: &Self) -> Result<f64, SketchError> {
        match (self, other) {
            (BallStore::Exact(a), BallStore::Exact(b)) => a.estimate_jaccard(b),
            (BallStore::MinHash(a), BallStore::MinHash(b)) => a.estimate_jaccard(b),
            (BallStore::KmvMinHash(a), BallStore::KmvMinHash(b)) => a.estimate_jaccard(b),
            (BallStore::Kmv(_), BallStore::Kmv(_)) => Err(SketchError::Unsupported("kmv")),
            (a, b) => Err(mismatch(a, b)),
        }
    }
}

fn mismatch(a: &BallStore, b: &BallStore) -> SketchError {
    SketchError::KindMismatch {
        left: a.kind().name(),
        right: b.kind().name(),
    }
}

impl Ball for BallStore {
    type Digest = StoreDigest;
    // Nominal; `accepts` is overridden to take any spec.
    const KIND: StoreKind = StoreKind::Exact;

    fn empty(ctx: &SketchContext) -> Self {
        match ctx.spec() {
            StoreSpec::Exact => BallStore::Exact(ExactBall::empty(ctx)),
            StoreSpec::Kmv { .. } => BallStore::Kmv(KmvSketch::empty(ctx)),
            StoreSpec::MinHash { .. } => BallStore::MinHash(MinHashSignature::empty(ctx)),
            StoreSpec::KmvMinHash { .. } => BallStore::KmvMinHash(KmvMinHash::empty(ctx)),
        }
    }

    fn digest(v: VertexId, ctx: &SketchContext) -> StoreDigest {
        match ctx.spec() {
            StoreSpec::Exact => StoreDigest::Exact(v),
            StoreSpec::Kmv { .. } => StoreDigest::Kmv(KmvSketch::digest(v, ctx)),
            StoreSpec::MinHash { .. } => StoreDigest::MinHash(MinHashSignature::digest(v, ctx)),
            StoreSpec::KmvMinHash { .. } => StoreDigest::KmvMinHash(KmvMinHash::digest(v, ctx)),
        }
    }

    fn insert_digest(&mut self, d: &StoreDigest) {
        match (self, d) {
            (BallStore::Exact(b), StoreDigest::Exact(d)) => b.insert_digest(d),
            (BallStore::Kmv(b), StoreDigest::Kmv(d)) => b.insert_digest(d),
            (BallStore::MinHash(b), StoreDigest::MinHash(d)) => b.insert_digest(d),
            (BallStore::KmvMinHash(b), StoreDigest::KmvMinHash(d)) => b.insert_digest(d),
            (store, _) => panic!("digest does not match a {} store", store.kind().name()),
        }
    }

    fn union_with(&mut self, other: &Self) {
        if let Err(e) = self.try_merge(other) {
            panic!("{e}");
        }
    }

    fn try_merge(&mut self, other: &Self) -> Result<(), SketchError> {
        if self.kind() != other.kind() {
            return Err(mismatch(self, other));
        }
        match (self, other) {
            (BallStore::Exact(a), BallStore::Exact(b)) => a.try_merge(b),
            (BallStore::Kmv(a), BallStore::Kmv(b)) => a.try_merge(b),
            (BallStore::MinHash(a), BallStore::MinHash(b)) => a.try_merge(b),
            (BallStore::KmvMinHash(a), BallStore::KmvMinHash(b)) => a.try_merge(b),
            _ => unreachable!("kinds checked above"),
        }
    }

    fn accepts(_spec: &StoreSpec) -> bool {
        true
    }
}
