//! Decomposable, score-equivalent scoring of network structures.
//!
//! A [`Scorer`] binds a dataset to a scoring function and memoises local scores
//! `g(y, Pa)` in a [`LocalScoreCache`] keyed by child and sorted parent set. The cache
//! also keeps the counters reported by searches: distinct evaluations (EstEv), total
//! requests (TEst) and the mean family size of the evaluations (NVars).

mod kl;
mod local;
mod table;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use serde::Serialize;
use thiserror::Error;

use crate::data::Dataset;
use crate::graph::{GraphError, PartialDag};

pub use kl::kl_fit_term;
pub use local::{bdeu_local, bic_local, PARAMETER_PENALTY};
pub use table::{count_statistics, ContingencyTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("node {0} is not a variable of the dataset")]
    InvalidNode(usize),
    #[error("node {0} cannot be its own parent")]
    ChildInParents(usize),
    #[error("contingency table for node {child} is too large")]
    TableTooLarge { child: usize },
    #[error("equivalent sample size must be positive and finite, got {0}")]
    InvalidEss(f64),
    #[error("unknown score `{0}` (expected `bdeu` or `bic`)")]
    UnknownScore(String),
    #[error("unknown structure prior `{0}` (expected `uniform` or `param-penalty`)")]
    UnknownPrior(String),
    #[error("structure has {structure} nodes but the dataset has {data} variables")]
    Arity { structure: usize, data: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructurePrior {
    #[default]
    Uniform,
    /// `0.001^f`, with `f` the family's free parameter count.
    ParameterPenalty,
}

impl FromStr for StructurePrior {
    type Err = ScoreError;

    fn from_str(s: &str) -> Result<Self, ScoreError> {
        match s {
            "uniform" => Ok(StructurePrior::Uniform),
            "param-penalty" | "parameter-penalty" => Ok(StructurePrior::ParameterPenalty),
            other => Err(ScoreError::UnknownPrior(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "score", rename_all = "lowercase")]
pub enum ScoreKind {
    Bdeu { ess: f64, prior: StructurePrior },
    Bic,
}

impl ScoreKind {
    /// BDeu with the given equivalent sample size and a uniform structure prior.
    pub fn bdeu(ess: f64) -> Self {
        ScoreKind::Bdeu {
            ess,
            prior: StructurePrior::Uniform,
        }
    }

    /// Resolves a score identifier (`bdeu` or `bic`).
    pub fn from_id(id: &str, ess: f64, prior: StructurePrior) -> Result<Self, ScoreError> {
        let kind = match id.to_ascii_lowercase().as_str() {
            "bdeu" => ScoreKind::Bdeu { ess, prior },
            "bic" => ScoreKind::Bic,
            _ => return Err(ScoreError::UnknownScore(id.to_string())),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn id(&self) -> &'static str {
        match self {
            ScoreKind::Bdeu { .. } => "bdeu",
            ScoreKind::Bic => "bic",
        }
    }

    fn validate(&self) -> Result<(), ScoreError> {
        match *self {
            ScoreKind::Bdeu { ess, .. } if !(ess > 0.0 && ess.is_finite()) => {
                Err(ScoreError::InvalidEss(ess))
            }
            _ => Ok(()),
        }
    }
}

impl Default for ScoreKind {
    fn default() -> Self {
        ScoreKind::bdeu(1.0)
    }
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreKind::Bdeu { ess, prior } => write!(f, "bdeu(ess={ess}, prior={prior:?})"),
            ScoreKind::Bic => write!(f, "bic"),
        }
    }
}

/// Uncached local score `g(child, parents)`.
pub fn local_score(
    data: &Dataset,
    kind: ScoreKind,
    child: usize,
    parents: &[usize],
) -> Result<f64, ScoreError> {
    let table = count_statistics(data, child, parents)?;
    match kind {
        ScoreKind::Bdeu { ess, prior } => bdeu_local(&table, ess, prior),
        ScoreKind::Bic => Ok(bic_local(&table, data.row_count())),
    }
}

/// Snapshot of the cache instrumentation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CacheCounters {
    /// Local scores actually computed (EstEv).
    pub evaluated: u64,
    /// Local scores requested, hits included (TEst).
    pub requested: u64,
    /// Sum of `|parents| + 1` over computed entries.
    pub variable_count_sum: u64,
}

impl CacheCounters {
    /// Mean number of variables per computed statistic (NVars); 0 before any evaluation.
    pub fn n_vars(&self) -> f64 {
        if self.evaluated == 0 {
            0.0
        } else {
            self.variable_count_sum as f64 / self.evaluated as f64
        }
    }
}

type FamilyKey = (usize, Vec<usize>);

/// Memo table of local scores. Lookups take a shared lock; misses compute under the
/// write lock so a key is evaluated at most once.
#[derive(Debug, Default)]
pub struct LocalScoreCache {
    store: RwLock<HashMap<FamilyKey, f64>>,
    requested: AtomicU64,
    evaluated: AtomicU64,
    variable_count_sum: AtomicU64,
}

impl LocalScoreCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// `parents` must already be sorted.
    pub fn get_or_compute<F>(
        &self,
        child: usize,
        parents: &[usize],
        compute: F,
    ) -> Result<f64, ScoreError>
    where
        F: FnOnce() -> Result<f64, ScoreError>,
    {
        debug_assert!(parents.windows(2).all(|w| w[0] < w[1]));
        self.requested.fetch_add(1, Ordering::Relaxed);
        let key = (child, parents.to_vec());
        if let Some(&v) = self.store.read().expect("cache lock poisoned").get(&key) {
            return Ok(v);
        }
        let mut store = self.store.write().expect("cache lock poisoned");
        if let Some(&v) = store.get(&key) {
            return Ok(v);
        }
        let value = compute()?;
        self.evaluated.fetch_add(1, Ordering::Relaxed);
        self.variable_count_sum
            .fetch_add(parents.len() as u64 + 1, Ordering::Relaxed);
        store.insert(key, value);
        Ok(value)
    }

    pub fn counters(&self) -> CacheCounters {
        CacheCounters {
            evaluated: self.evaluated.load(Ordering::Relaxed),
            requested: self.requested.load(Ordering::Relaxed),
            variable_count_sum: self.variable_count_sum.load(Ordering::Relaxed),
        }
    }

    pub fn len(&self) -> usize {
        self.store.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The cached families, sorted.
    pub fn keys(&self) -> Vec<(usize, Vec<usize>)> {
        let mut keys: Vec<_> = self
            .store
            .read()
            .expect("cache lock poisoned")
            .keys()
            .cloned()
            .collect();
        keys.sort();
        keys
    }
}

/// A scoring function bound to a dataset, with its own local-score cache.
#[derive(Debug)]
pub struct Scorer<'a> {
    data: &'a Dataset,
    kind: ScoreKind,
    cache: LocalScoreCache,
}

impl<'a> Scorer<'a> {
    pub fn new(data: &'a Dataset, kind: ScoreKind) -> Result<Self, ScoreError> {
        kind.validate()?;
        Ok(Scorer {
            data,
            kind,
            cache: LocalScoreCache::new(),
        })
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn cache(&self) -> &LocalScoreCache {
        &self.cache
    }

    pub fn counters(&self) -> CacheCounters {
        self.cache.counters()
    }

    /// Cached `g(child, parents)`; `parents` may be in any order.
    pub fn local<I>(&self, child: usize, parents: I) -> Result<f64, ScoreError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut pa: Vec<usize> = parents.into_iter().collect();
        pa.sort_unstable();
        pa.dedup();
        self.cache
            .get_or_compute(child, &pa, || local_score(self.data, self.kind, child, &pa))
    }

    fn check_arity(&self, g: &PartialDag) -> Result<(), ScoreError> {
        if g.node_count() != self.data.variable_count() {
            return Err(ScoreError::Arity {
                structure: g.node_count(),
                data: self.data.variable_count(),
            });
        }
        Ok(())
    }

    /// Sum of local scores of a DAG.
    pub fn score_dag(&self, dag: &PartialDag) -> Result<f64, ScoreError> {
        self.check_arity(dag)?;
        if !dag.is_dag() {
            return Err(GraphError::NotDag.into());
        }
        dag.nodes()
            .map(|y| self.local(y, dag.parents(y).iter().copied()))
            .sum()
    }

    /// Score of an RPDAG through its canonical extension.
    pub fn score_rpdag(&self, rpdag: &PartialDag) -> Result<f64, ScoreError> {
        self.check_arity(rpdag)?;
        self.score_dag(&rpdag.extend()?)
    }
}
