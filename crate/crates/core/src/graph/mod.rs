//! Mixed graphs of arcs (`x -> y`) and links (`x -- y`) over dense node indices.
//!
//! [`PartialDag`] is the state every search in this crate moves through. It keeps an
//! `n x n` mark matrix for constant-time adjacency tests plus sorted per-node parent,
//! child and neighbor sets, so iteration order is always ascending by node index.

mod enumerate;
mod rpdag;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use enumerate::{all_dags, Census};
pub use rpdag::{is_extension, EquivalenceKey, RpdagViolation};

/// Sorted arcs and links of a graph, usable as a map key.
pub type EdgeLists = (Vec<(usize, usize)>, Vec<(usize, usize)>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {node} out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("nodes {0} and {1} are already adjacent")]
    AlreadyAdjacent(usize, usize),
    #[error("no arc {0} -> {1}")]
    MissingArc(usize, usize),
    #[error("no link {0} -- {1}")]
    MissingLink(usize, usize),
    #[error("graph is not a DAG")]
    NotDag,
    #[error("graph is not an RPDAG: {0}")]
    NotRpdag(RpdagViolation),
    #[error("graphs have different node counts ({0} vs {1})")]
    NodeCountMismatch(usize, usize),
}

/// The mark stored for the ordered pair `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
enum Mark {
    #[default]
    None,
    /// `u -> v`
    Out,
    /// `v -> u`
    In,
    /// `u -- v`
    Link,
}

/// Local degree counts of a node: parents, children, neighbors and adjacents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Degrees {
    pub parents: usize,
    pub children: usize,
    pub neighbors: usize,
    pub adjacent: usize,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialDag {
    node_count: usize,
    marks: Vec<Mark>,
    parents: Vec<BTreeSet<usize>>,
    children: Vec<BTreeSet<usize>>,
    neighbors: Vec<BTreeSet<usize>>,
}

impl PartialDag {
    pub fn new(node_count: usize) -> Self {
        PartialDag {
            node_count,
            marks: vec![Mark::None; node_count * node_count],
            parents: vec![BTreeSet::new(); node_count],
            children: vec![BTreeSet::new(); node_count],
            neighbors: vec![BTreeSet::new(); node_count],
        }
    }

    /// Builds a graph from explicit arc and link lists.
    pub fn from_edges(
        node_count: usize,
        arcs: &[(usize, usize)],
        links: &[(usize, usize)],
    ) -> Result<Self, GraphError> {
        let mut g = PartialDag::new(node_count);
        for &(x, y) in arcs {
            g.add_arc(x, y)?;
        }
        for &(x, y) in links {
            g.add_link(x, y)?;
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn nodes(&self) -> std::ops::Range<usize> {
        0..self.node_count
    }

    fn check_node(&self, node: usize) -> Result<(), GraphError> {
        if node < self.node_count {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange {
                node,
                node_count: self.node_count,
            })
        }
    }

    fn check_pair(&self, x: usize, y: usize) -> Result<(), GraphError> {
        self.check_node(x)?;
        self.check_node(y)?;
        if x == y {
            return Err(GraphError::SelfLoop(x));
        }
        Ok(())
    }

    #[inline]
    fn mark(&self, u: usize, v: usize) -> Mark {
        self.marks[u * self.node_count + v]
    }

    #[inline]
    fn set_marks(&mut self, u: usize, v: usize, uv: Mark, vu: Mark) {
        let n = self.node_count;
        self.marks[u * n + v] = uv;
        self.marks[v * n + u] = vu;
    }

    pub fn add_arc(&mut self, x: usize, y: usize) -> Result<(), GraphError> {
        self.check_pair(x, y)?;
        if self.is_adjacent(x, y) {
            return Err(GraphError::AlreadyAdjacent(x, y));
        }
        self.set_marks(x, y, Mark::Out, Mark::In);
        self.children[x].insert(y);
        self.parents[y].insert(x);
        Ok(())
    }

    pub fn add_link(&mut self, x: usize, y: usize) -> Result<(), GraphError> {
        self.check_pair(x, y)?;
        if self.is_adjacent(x, y) {
            return Err(GraphError::AlreadyAdjacent(x, y));
        }
        self.set_marks(x, y, Mark::Link, Mark::Link);
        self.neighbors[x].insert(y);
        self.neighbors[y].insert(x);
        Ok(())
    }

    pub fn remove_arc(&mut self, x: usize, y: usize) -> Result<(), GraphError> {
        self.check_pair(x, y)?;
        if !self.has_arc(x, y) {
            return Err(GraphError::MissingArc(x, y));
        }
        self.set_marks(x, y, Mark::None, Mark::None);
        self.children[x].remove(&y);
        self.parents[y].remove(&x);
        Ok(())
    }

    pub fn remove_link(&mut self, x: usize, y: usize) -> Result<(), GraphError> {
        self.check_pair(x, y)?;
        if !self.has_link(x, y) {
            return Err(GraphError::MissingLink(x, y));
        }
        self.set_marks(x, y, Mark::None, Mark::None);
        self.neighbors[x].remove(&y);
        self.neighbors[y].remove(&x);
        Ok(())
    }

    /// Removes whatever edge joins `x` and `y`. Returns false if they were not adjacent.
    pub fn remove_edge(&mut self, x: usize, y: usize) -> Result<bool, GraphError> {
        self.check_pair(x, y)?;
        match self.mark(x, y) {
            Mark::None => return Ok(false),
            Mark::Out => self.remove_arc(x, y)?,
            Mark::In => self.remove_arc(y, x)?,
            Mark::Link => self.remove_link(x, y)?,
        }
        Ok(true)
    }

    /// Replaces the link `x -- y` with the arc `x -> y`.
    pub fn orient_link(&mut self, x: usize, y: usize) -> Result<(), GraphError> {
        self.remove_link(x, y)?;
        self.add_arc(x, y)
    }

    /// Replaces the arc `x -> y` with the link `x -- y`.
    pub fn unorient_arc(&mut self, x: usize, y: usize) -> Result<(), GraphError> {
        self.remove_arc(x, y)?;
        self.add_link(x, y)
    }

    pub fn has_arc(&self, x: usize, y: usize) -> bool {
        x < self.node_count && y < self.node_count && self.mark(x, y) == Mark::Out
    }

    pub fn has_link(&self, x: usize, y: usize) -> bool {
        x < self.node_count && y < self.node_count && x != y && self.mark(x, y) == Mark::Link
    }

    pub fn is_adjacent(&self, x: usize, y: usize) -> bool {
        x < self.node_count && y < self.node_count && self.mark(x, y) != Mark::None
    }

    pub fn parents(&self, y: usize) -> &BTreeSet<usize> {
        &self.parents[y]
    }

    pub fn children(&self, y: usize) -> &BTreeSet<usize> {
        &self.children[y]
    }

    pub fn neighbors(&self, y: usize) -> &BTreeSet<usize> {
        &self.neighbors[y]
    }

    /// `Ad(y) = Pa(y) ∪ Ch(y) ∪ Ne(y)`, ascending.
    pub fn adjacent(&self, y: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.parents[y]
            .iter()
            .chain(&self.children[y])
            .chain(&self.neighbors[y])
            .copied()
            .collect();
        out.sort_unstable();
        out
    }

    pub fn degrees(&self, y: usize) -> Result<Degrees, GraphError> {
        self.check_node(y)?;
        let parents = self.parents[y].len();
        let children = self.children[y].len();
        let neighbors = self.neighbors[y].len();
        Ok(Degrees {
            parents,
            children,
            neighbors,
            adjacent: parents + children + neighbors,
        })
    }

    /// Arcs in ascending `(from, to)` order.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        self.nodes()
            .flat_map(|x| self.children[x].iter().map(move |&y| (x, y)))
            .collect()
    }

    /// Links as `(a, b)` with `a < b`, ascending.
    pub fn links(&self) -> Vec<(usize, usize)> {
        self.nodes()
            .flat_map(|x| {
                self.neighbors[x]
                    .iter()
                    .filter(move |&&y| y > x)
                    .map(move |&y| (x, y))
            })
            .collect()
    }

    pub fn arc_count(&self) -> usize {
        self.children.iter().map(BTreeSet::len).sum()
    }

    pub fn link_count(&self) -> usize {
        self.neighbors.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn edge_count(&self) -> usize {
        self.arc_count() + self.link_count()
    }

    /// Unordered adjacent pairs `(a, b)` with `a < b`.
    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.arcs()
            .into_iter()
            .map(|(x, y)| (x.min(y), x.max(y)))
            .chain(self.links())
            .collect()
    }

    /// Head-to-head triplets `(x, y, z)` with `x -> y <- z` and `x < z`.
    pub fn hh_patterns(&self) -> BTreeSet<(usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for y in self.nodes() {
            let pa: Vec<usize> = self.parents[y].iter().copied().collect();
            for (i, &x) in pa.iter().enumerate() {
                for &z in &pa[i + 1..] {
                    out.insert((x, y, z));
                }
            }
        }
        out
    }

    /// Head-to-head triplets whose endpoints are not adjacent.
    pub fn v_structures(&self) -> BTreeSet<(usize, usize, usize)> {
        self.hh_patterns()
            .into_iter()
            .filter(|&(x, _, z)| !self.is_adjacent(x, z))
            .collect()
    }

    pub fn has_directed_cycle(&self) -> bool {
        self.topological_order().is_none()
    }

    /// Topological order of the directed part (links ignored), smallest index first
    /// among ready nodes. `None` if the arcs contain a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indegree: Vec<usize> = self.parents.iter().map(BTreeSet::len).collect();
        let mut ready: BTreeSet<usize> = self.nodes().filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(self.node_count);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &self.children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == self.node_count).then_some(order)
    }

    pub fn is_dag(&self) -> bool {
        self.link_count() == 0 && !self.has_directed_cycle()
    }

    /// True iff a directed path `from ~> to` exists using arcs only.
    pub fn directed_reachable(&self, from: usize, to: usize) -> bool {
        self.search(from, to, |g, v, out| {
            out.extend(g.children[v].iter().copied())
        })
    }

    /// True iff a links-only path joins `x` and `y` (the UC test).
    pub fn undirected_reachable(&self, x: usize, y: usize) -> bool {
        self.search(x, y, |g, v, out| out.extend(g.neighbors[v].iter().copied()))
    }

    /// True iff a partially directed path `y ~> x` exists: links in either direction,
    /// arcs only forward (the DC test).
    pub fn partially_directed_reachable(&self, y: usize, x: usize) -> bool {
        self.partially_directed_reachable_without_link(y, x, None)
    }

    /// DC test with one link treated as absent.
    pub fn partially_directed_reachable_without_link(
        &self,
        y: usize,
        x: usize,
        skip: Option<(usize, usize)>,
    ) -> bool {
        let skipped = |a: usize, b: usize| {
            skip.is_some_and(|(s, t)| (s == a && t == b) || (s == b && t == a))
        };
        self.search(y, x, |g, v, out| {
            out.extend(g.children[v].iter().copied());
            out.extend(g.neighbors[v].iter().copied().filter(|&w| !skipped(v, w)));
        })
    }

    fn search<F>(&self, from: usize, to: usize, expand: F) -> bool
    where
        F: Fn(&Self, usize, &mut Vec<usize>),
    {
        if from >= self.node_count || to >= self.node_count {
            return false;
        }
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![from];
        let mut next = Vec::new();
        seen[from] = true;
        while let Some(v) = stack.pop() {
            next.clear();
            expand(self, v, &mut next);
            for &w in &next {
                if w == to {
                    return true;
                }
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    /// Link-connected components, each sorted, ordered by their smallest node.
    pub fn chain_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.node_count];
        let mut out = Vec::new();
        for root in self.nodes() {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut comp = vec![root];
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                for &w in &self.neighbors[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

impl fmt::Debug for PartialDag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartialDag({}; ", self.node_count)?;
        let mut first = true;
        for (x, y) in self.arcs() {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{x}->{y}")?;
            first = false;
        }
        for (x, y) in self.links() {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{x}--{y}")?;
            first = false;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees_of_empty_graph() {
        let g = PartialDag::new(3);
        for y in g.nodes() {
            assert_eq!(g.degrees(y).unwrap(), Degrees::default());
        }
        assert!(matches!(
            g.degrees(3),
            Err(GraphError::NodeOutOfRange { node: 3, .. })
        ));
    }

    #[test]
    fn degrees_on_a_chain_of_arcs() {
        let g = PartialDag::from_edges(3, &[(0, 1), (1, 2)], &[]).unwrap();
        let d = g.degrees(1).unwrap();
        assert_eq!(
            (d.parents, d.children, d.neighbors, d.adjacent),
            (1, 1, 0, 2)
        );
    }

    #[test]
    fn degrees_in_the_two_neighbor_configuration() {
        // w -> x -> c, z -- y -- t: x has one parent and one child, y two neighbors.
        let (w, x, c, y, z, t) = (0, 1, 2, 3, 4, 5);
        let g = PartialDag::from_edges(6, &[(w, x), (x, c)], &[(y, z), (y, t)]).unwrap();
        let d = g.degrees(y).unwrap();
        assert_eq!((d.parents, d.neighbors), (0, 2));
        let d = g.degrees(x).unwrap();
        assert_eq!((d.parents, d.children), (1, 1));
        for v in g.nodes() {
            let d = g.degrees(v).unwrap();
            assert_eq!(d.parents + d.children + d.neighbors, d.adjacent);
        }
    }

    #[test]
    fn edge_insertion_rejects_bad_pairs() {
        let mut g = PartialDag::new(2);
        assert_eq!(g.add_arc(0, 0), Err(GraphError::SelfLoop(0)));
        g.add_arc(0, 1).unwrap();
        assert_eq!(g.add_link(1, 0), Err(GraphError::AlreadyAdjacent(1, 0)));
        assert_eq!(g.add_arc(1, 0), Err(GraphError::AlreadyAdjacent(1, 0)));
        assert!(matches!(
            g.add_arc(0, 5),
            Err(GraphError::NodeOutOfRange { .. })
        ));
    }

    #[test]
    fn dag_checks() {
        assert!(PartialDag::new(3).is_dag());
        let mut cyc = PartialDag::new(2);
        cyc.marks[1] = Mark::Out;
        cyc.marks[2] = Mark::Out;
        cyc.children[0].insert(1);
        cyc.parents[1].insert(0);
        cyc.children[1].insert(0);
        cyc.parents[0].insert(1);
        assert!(!cyc.is_dag());
        let mixed = PartialDag::from_edges(3, &[(0, 1)], &[(1, 2)]).unwrap();
        assert!(!mixed.is_dag());
        let cycle3 = PartialDag::from_edges(3, &[(0, 1), (1, 2), (2, 0)], &[]).unwrap();
        assert!(!cycle3.is_dag());
    }

    #[test]
    fn uc_test() {
        let g = PartialDag::from_edges(3, &[], &[(0, 1), (1, 2)]).unwrap();
        assert!(g.undirected_reachable(0, 2));
        let g = PartialDag::from_edges(3, &[(0, 1), (1, 2)], &[]).unwrap();
        assert!(!g.undirected_reachable(0, 2));
        let g = PartialDag::from_edges(3, &[], &[(0, 1)]).unwrap();
        assert!(!g.undirected_reachable(0, 2));
    }

    #[test]
    fn dc_test() {
        let (y, w, x) = (0, 1, 2);
        let g = PartialDag::from_edges(3, &[(y, w), (w, x)], &[]).unwrap();
        assert!(g.partially_directed_reachable(y, x));
        let g = PartialDag::from_edges(3, &[(w, x)], &[(y, w)]).unwrap();
        assert!(g.partially_directed_reachable(y, x));
        assert!(!g.partially_directed_reachable_without_link(y, x, Some((w, y))));
        let g = PartialDag::from_edges(3, &[(x, y)], &[]).unwrap();
        assert!(!g.partially_directed_reachable(y, x));
    }

    #[test]
    fn chain_components_partition() {
        assert_eq!(
            PartialDag::new(3).chain_components(),
            vec![vec![0], vec![1], vec![2]]
        );
        let g = PartialDag::from_edges(5, &[(3, 4)], &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.chain_components(), vec![vec![0, 1, 2], vec![3], vec![4]]);
    }

    #[test]
    fn hh_and_v_structures() {
        let g = PartialDag::from_edges(3, &[(0, 1), (2, 1)], &[]).unwrap();
        assert_eq!(
            g.hh_patterns().into_iter().collect::<Vec<_>>(),
            vec![(0, 1, 2)]
        );
        assert_eq!(g.v_structures().len(), 1);
        let g = PartialDag::from_edges(3, &[(0, 1), (2, 1), (0, 2)], &[]).unwrap();
        assert_eq!(g.hh_patterns().len(), 1);
        assert!(g.v_structures().is_empty());
    }
}
