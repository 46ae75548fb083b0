//! Restricted PDAGs: validity, the orientation cascades that keep a graph restricted,
//! canonical reduction, and the extension machinery linking an RPDAG to its DAGs.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{GraphError, PartialDag};

/// The first restriction a graph fails. `condition()` numbers them 1-4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpdagViolation {
    /// A node has both a parent and a neighbor.
    ParentAndNeighbor {
        node: usize,
    },
    DirectedCycle,
    UndirectedCycle,
    /// Arc `from -> to` where `to` has a single parent and `from` has none.
    UnsupportedArc {
        from: usize,
        to: usize,
    },
}

impl RpdagViolation {
    pub fn condition(&self) -> u8 {
        match self {
            RpdagViolation::ParentAndNeighbor { .. } => 1,
            RpdagViolation::DirectedCycle => 2,
            RpdagViolation::UndirectedCycle => 3,
            RpdagViolation::UnsupportedArc { .. } => 4,
        }
    }
}

impl fmt::Display for RpdagViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RpdagViolation::ParentAndNeighbor { node } => {
                write!(f, "node {node} has both parents and neighbors")
            }
            RpdagViolation::DirectedCycle => write!(f, "directed cycle"),
            RpdagViolation::UndirectedCycle => write!(f, "completely undirected cycle"),
            RpdagViolation::UnsupportedArc { from, to } => write!(
                f,
                "arc {from} -> {to} is neither in an h-h pattern nor preceded by an arc"
            ),
        }
    }
}

/// Skeleton plus head-to-head patterns of a DAG. Two DAGs share a key iff they
/// extend the same RPDAG.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EquivalenceKey {
    pub skeleton: BTreeSet<(usize, usize)>,
    /// `(x, y, z)` for `x -> y <- z`, with `x < z`.
    pub hh_patterns: BTreeSet<(usize, usize, usize)>,
}

impl PartialDag {
    /// Checks conditions 1-3 (no parent+neighbor node, no directed cycle, links form a forest).
    fn check_conditions_1_to_3(&self) -> Result<(), RpdagViolation> {
        if let Some(node) = self
            .nodes()
            .find(|&y| !self.parents(y).is_empty() && !self.neighbors(y).is_empty())
        {
            return Err(RpdagViolation::ParentAndNeighbor { node });
        }
        if self.has_directed_cycle() {
            return Err(RpdagViolation::DirectedCycle);
        }
        if self.has_undirected_cycle() {
            return Err(RpdagViolation::UndirectedCycle);
        }
        Ok(())
    }

    fn unsupported_arc(&self) -> Option<(usize, usize)> {
        self.arcs()
            .into_iter()
            .find(|&(x, y)| self.parents(y).len() < 2 && self.parents(x).is_empty())
    }

    pub fn check_rpdag(&self) -> Result<(), RpdagViolation> {
        self.check_conditions_1_to_3()?;
        match self.unsupported_arc() {
            Some((from, to)) => Err(RpdagViolation::UnsupportedArc { from, to }),
            None => Ok(()),
        }
    }

    pub fn is_rpdag(&self) -> bool {
        self.check_rpdag().is_ok()
    }

    fn require_rpdag(&self) -> Result<(), GraphError> {
        self.check_rpdag().map_err(GraphError::NotRpdag)
    }

    fn require_dag(&self) -> Result<(), GraphError> {
        if self.is_dag() {
            Ok(())
        } else {
            Err(GraphError::NotDag)
        }
    }

    fn has_undirected_cycle(&self) -> bool {
        let mut parent: Vec<usize> = self.nodes().collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for (a, b) in self.links() {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return true;
            }
            parent[ra] = rb;
        }
        false
    }

    /// Directs every link reachable from `y` through links away from `y`.
    ///
    /// Called right after `y` gains a parent, this restores "a node with a parent has no
    /// neighbors". Walks only `y`'s chain component. No-op if `y` has no parent.
    pub fn complete_cascade(&mut self, y: usize) {
        if self.parents(y).is_empty() {
            return;
        }
        let mut stack = vec![y];
        while let Some(v) = stack.pop() {
            let ne: Vec<usize> = self.neighbors(v).iter().copied().collect();
            for t in ne {
                self.orient_link(v, t)
                    .expect("link listed in the neighbor set must exist");
                stack.push(t);
            }
        }
    }

    /// Turns unsupported arcs around `y` back into links after an arc into `y` was deleted.
    ///
    /// Repeatedly undirects `u -> v` whenever `Pa(u)` is empty and `Pa(v) = {u}`, starting at
    /// `y` and following the nodes that lose their last parent.
    pub fn undo_cascade(&mut self, y: usize) {
        let mut stack = vec![y];
        while let Some(v) = stack.pop() {
            if self.parents(v).len() == 1 {
                let u = *self.parents(v).first().unwrap();
                if self.parents(u).is_empty() {
                    self.unorient_arc(u, v).expect("parent arc must exist");
                }
            }
            if self.parents(v).is_empty() {
                let ch: Vec<usize> = self.children(v).iter().copied().collect();
                for c in ch {
                    if self.parents(c).len() == 1 {
                        self.unorient_arc(v, c).expect("child arc must exist");
                        stack.push(c);
                    }
                }
            }
        }
    }

    /// The unique RPDAG whose extensions include every extension of `self`.
    ///
    /// Requires conditions 1-3; arcs are undirected in ascending `(x, y)` order until no arc
    /// `x -> y` has `Pa(x) = ∅` and `Pa(y) = {x}`.
    pub fn reduce_to_rpdag(&self) -> Result<PartialDag, GraphError> {
        self.check_conditions_1_to_3()
            .map_err(GraphError::NotRpdag)?;
        let mut r = self.clone();
        while let Some((x, y)) = r.unsupported_arc() {
            r.unorient_arc(x, y)?;
        }
        Ok(r)
    }

    /// Deterministic extension: each chain component is rooted at its lowest node and its
    /// link tree is directed away from the root.
    pub fn extend(&self) -> Result<PartialDag, GraphError> {
        self.require_rpdag()?;
        let mut h = self.clone();
        for comp in self.chain_components() {
            let root = comp[0];
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                let ne: Vec<usize> = h.neighbors(v).iter().copied().collect();
                for t in ne {
                    h.orient_link(v, t)?;
                    stack.push(t);
                }
            }
        }
        debug_assert!(h.is_dag());
        Ok(h)
    }

    /// Number of DAGs extending this RPDAG: product of chain component sizes.
    pub fn count_extensions(&self) -> Result<u128, GraphError> {
        self.require_rpdag()?;
        Ok(self
            .chain_components()
            .iter()
            .map(|c| c.len() as u128)
            .product())
    }

    /// Skeleton and h-h patterns of a DAG.
    pub fn equivalence_key(&self) -> Result<EquivalenceKey, GraphError> {
        self.require_dag()?;
        Ok(EquivalenceKey {
            skeleton: self.skeleton(),
            hh_patterns: self.hh_patterns(),
        })
    }
}

/// Whether the DAG `dag` extends the RPDAG `rpdag`, via the local parent-set test.
pub fn is_extension(rpdag: &PartialDag, dag: &PartialDag) -> Result<bool, GraphError> {
    if rpdag.node_count() != dag.node_count() {
        return Err(GraphError::NodeCountMismatch(
            rpdag.node_count(),
            dag.node_count(),
        ));
    }
    rpdag.require_rpdag()?;
    dag.require_dag()?;
    if rpdag.skeleton() != dag.skeleton() {
        return Ok(false);
    }
    for y in rpdag.nodes() {
        let pg = rpdag.parents(y);
        let ph = dag.parents(y);
        if !pg.is_empty() && pg != ph {
            return Ok(false);
        }
        if pg.is_empty() && ph.len() > 1 {
            return Ok(false);
        }
    }
    Ok(true)
}
