//! Neighborhood representations: exact sets, KMV cardinality sketches and
//! minhash signatures, all supporting element insertion and union.

mod exact;
mod hash;
mod kmv;
mod minhash;
mod store;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::VertexId;

pub use exact::{jaccard as exact_jaccard, ExactBall};
pub(crate) use hash::stream;
pub use hash::{derive_seeds, HashFamily};
pub use kmv::KmvSketch;
pub use minhash::MinHashSignature;
pub use store::{BallStore, KmvMinHash, StoreDigest};

pub const DEFAULT_KMV_SIZE: usize = 32;
pub const DEFAULT_MINHASH_SIZE: usize = 100;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SketchError {
    #[error("cannot combine a {left} store with a {right} store")]
    KindMismatch {
        left: &'static str,
        right: &'static str,
    },
    #[error("sketches were built with different hash seeds ({left:#x} vs {right:#x})")]
    SeedMismatch { left: u64, right: u64 },
    #[error("sketch sizes differ ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },
    #[error("operation requires an exact store, found {0}")]
    NotExact(&'static str),
    #[error("{0} stores cannot answer this query")]
    Unsupported(&'static str),
    #[error("invalid store spec `{0}` (expected exact, kmv:S, minhash:H or kmv:S+minhash:H)")]
    BadSpec(String),
}

/// Which representation backs each vertex's balls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoreSpec {
    Exact,
    Kmv { size: usize },
    MinHash { hashes: usize },
    KmvMinHash { size: usize, hashes: usize },
}

impl StoreSpec {
    pub fn kind(&self) -> StoreKind {
        match self {
            StoreSpec::Exact => StoreKind::Exact,
            StoreSpec::Kmv { .. } => StoreKind::Kmv,
            StoreSpec::MinHash { .. } => StoreKind::MinHash,
            StoreSpec::KmvMinHash { .. } => StoreKind::KmvMinHash,
        }
    }

    pub fn kmv() -> Self {
        StoreSpec::Kmv {
            size: DEFAULT_KMV_SIZE,
        }
    }

    pub fn minhash() -> Self {
        StoreSpec::MinHash {
            hashes: DEFAULT_MINHASH_SIZE,
        }
    }
}

impl fmt::Display for StoreSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreSpec::Exact => write!(f, "exact"),
            StoreSpec::Kmv { size } => write!(f, "kmv:{size}"),
            StoreSpec::MinHash { hashes } => write!(f, "minhash:{hashes}"),
            StoreSpec::KmvMinHash { size, hashes } => write!(f, "kmv:{size}+minhash:{hashes}"),
        }
    }
}

impl FromStr for StoreSpec {
    type Err = SketchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SketchError::BadSpec(s.to_owned());
        let parse_part = |part: &str| -> Result<(StoreKind, usize), SketchError> {
            let (name, size) = match part.split_once(':') {
                Some((name, size)) => (name, Some(size)),
                None => (part, None),
            };
            let size = match size {
                Some(sz) => Some(sz.parse::<usize>().map_err(|_| bad())?),
                None => None,
            };
            match (name, size) {
                ("exact", None) => Ok((StoreKind::Exact, 0)),
                ("kmv", size) => Ok((StoreKind::Kmv, size.unwrap_or(DEFAULT_KMV_SIZE))),
                ("minhash", Some(0)) => Err(bad()),
                ("minhash", size) => Ok((StoreKind::MinHash, size.unwrap_or(DEFAULT_MINHASH_SIZE))),
                _ => Err(bad()),
            }
        };
        let s_trim = s.trim();
        match s_trim.split_once('+') {
            None => match parse_part(s_trim)? {
                (StoreKind::Exact, _) => Ok(StoreSpec::Exact),
                (StoreKind::Kmv, size) if size >= 2 => Ok(StoreSpec::Kmv { size }),
                (StoreKind::MinHash, hashes) => Ok(StoreSpec::MinHash { hashes }),
                _ => Err(bad()),
            },
            Some((a, b)) => match (parse_part(a)?, parse_part(b)?) {
                ((StoreKind::Kmv, size), (StoreKind::MinHash, hashes))
                | ((StoreKind::MinHash, hashes), (StoreKind::Kmv, size))
                    if size >= 2 =>
                {
                    Ok(StoreSpec::KmvMinHash { size, hashes })
                }
                _ => Err(bad()),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StoreKind {
    Exact,
    Kmv,
    MinHash,
    KmvMinHash,
}

impl StoreKind {
    pub fn name(self) -> &'static str {
        match self {
            StoreKind::Exact => "exact",
            StoreKind::Kmv => "kmv",
            StoreKind::MinHash => "minhash",
            StoreKind::KmvMinHash => "kmv+minhash",
        }
    }
}

/// Hash functions shared by every store of one engine, derived from a single
/// experiment seed.
#[derive(Clone, Debug)]
pub struct SketchContext {
    spec: StoreSpec,
    seed: u64,
    kmv: Option<HashFamily>,
    minhash: Vec<HashFamily>,
}

impl SketchContext {
    pub fn new(spec: StoreSpec, seed: u64) -> Self {
        let (kmv, hashes) = match spec {
            StoreSpec::Exact => (false, 0),
            StoreSpec::Kmv { .. } => (true, 0),
            StoreSpec::MinHash { hashes } => (false, hashes),
            StoreSpec::KmvMinHash { hashes, .. } => (true, hashes),
        };
        let kmv = kmv.then(|| HashFamily::new(derive_seeds(seed, stream::KMV, 1)[0]));
        let minhash = derive_seeds(seed, stream::MINHASH, hashes)
            .into_iter()
            .map(HashFamily::new)
            .collect();
        Self {
            spec,
            seed,
            kmv,
            minhash,
        }
    }

    pub fn spec(&self) -> StoreSpec {
        self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kmv_size(&self) -> usize {
        match self.spec {
            StoreSpec::Kmv { size } | StoreSpec::KmvMinHash { size, .. } => size,
            _ => DEFAULT_KMV_SIZE,
        }
    }

    pub(crate) fn kmv_family(&self) -> &HashFamily {
        self.kmv.as_ref().expect("store spec has no KMV component")
    }

    pub(crate) fn minhash_families(&self) -> &[HashFamily] {
        &self.minhash
    }
}

/// A mergeable representation of a vertex set.
///
/// Implementations are set functions: the same item set yields
/// representation-equal values regardless of insertion or merge order.
pub trait Ball: Clone + PartialEq + fmt::Debug + Send + Sync {
    /// Per-element precomputation (hash values) reusable across stores.
    type Digest;

    const KIND: StoreKind;

    fn empty(ctx: &SketchContext) -> Self;

    fn digest(v: VertexId, ctx: &SketchContext) -> Self::Digest;

    fn insert_digest(&mut self, digest: &Self::Digest);

    fn insert(&mut self, v: VertexId, ctx: &SketchContext) {
        let d = Self::digest(v, ctx);
        self.insert_digest(&d);
    }

    /// Union in place. Both sides must come from the same context.
    fn union_with(&mut self, other: &Self);

    /// Checked union; reports kind, size or seed mismatches.
    fn try_merge(&mut self, other: &Self) -> Result<(), SketchError>;

    /// Whether stores of this type can be built from `spec`.
    fn accepts(spec: &StoreSpec) -> bool {
        spec.kind() == Self::KIND
    }
}

/// Stores able to estimate the cardinality of the set they represent.
pub trait SizeEstimate {
    fn estimate_size(&self) -> f64;
}

/// Stores able to estimate Jaccard similarity against a peer.
pub trait JaccardEstimate {
    fn estimate_jaccard(&self, other: &Self) -> Result<f64, SketchError>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_store_specs() {
        assert_eq!("exact".parse::<StoreSpec>().unwrap(), StoreSpec::Exact);
        assert_eq!(
            "kmv:32".parse::<StoreSpec>().unwrap(),
            StoreSpec::Kmv { size: 32 }
        );
        assert_eq!("kmv".parse::<StoreSpec>().unwrap(), StoreSpec::kmv());
        assert_eq!(
            "minhash:64".parse::<StoreSpec>().unwrap(),
            StoreSpec::MinHash { hashes: 64 }
        );
        assert_eq!(
            "kmv:16+minhash:8".parse::<StoreSpec>().unwrap(),
            StoreSpec::KmvMinHash {
                size: 16,
                hashes: 8
            }
        );
        for bad in ["", "hll:4", "kmv:x", "kmv:1", "exact:3", "kmv:3+kmv:4"] {
            assert!(bad.parse::<StoreSpec>().is_err(), "{bad}");
        }
        for spec in [StoreSpec::Exact, StoreSpec::kmv(), StoreSpec::minhash()] {
            assert_eq!(spec.to_string().parse::<StoreSpec>().unwrap(), spec);
        }
    }
}
