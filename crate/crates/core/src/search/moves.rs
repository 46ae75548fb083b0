//! The five RPDAG operators: applicability, application with post-processing, and
//! two-local-score deltas.

use std::fmt;

use serde::Serialize;

use super::SearchError;
use crate::graph::PartialDag;
use crate::scoring::Scorer;

/// Operator kinds, declared in tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MoveKind {
    /// Insert the link `x -- y`.
    AddLink,
    /// Insert the arc `x -> y`.
    AddArc,
    /// Insert `x -> y` and turn the link `y -- z` into `z -> y`.
    AddHeadToHead,
    /// Delete the arc `x -> y`.
    DeleteArc,
    /// Delete the link `x -- y`.
    DeleteLink,
}

impl MoveKind {
    pub fn is_insertion(self) -> bool {
        matches!(
            self,
            MoveKind::AddLink | MoveKind::AddArc | MoveKind::AddHeadToHead
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Move {
    pub kind: MoveKind,
    pub x: usize,
    pub y: usize,
    /// Only set for [`MoveKind::AddHeadToHead`].
    pub z: Option<usize>,
}

impl Move {
    pub fn add_link(x: usize, y: usize) -> Self {
        Move {
            kind: MoveKind::AddLink,
            x,
            y,
            z: None,
        }
    }

    pub fn add_arc(x: usize, y: usize) -> Self {
        Move {
            kind: MoveKind::AddArc,
            x,
            y,
            z: None,
        }
    }

    pub fn add_hh(x: usize, y: usize, z: usize) -> Self {
        Move {
            kind: MoveKind::AddHeadToHead,
            x,
            y,
            z: Some(z),
        }
    }

    pub fn delete_arc(x: usize, y: usize) -> Self {
        Move {
            kind: MoveKind::DeleteArc,
            x,
            y,
            z: None,
        }
    }

    pub fn delete_link(x: usize, y: usize) -> Self {
        Move {
            kind: MoveKind::DeleteLink,
            x,
            y,
            z: None,
        }
    }

    /// Unordered endpoints of the edge inserted or removed.
    pub fn pair(&self) -> (usize, usize) {
        (self.x.min(self.y), self.x.max(self.y))
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (x, y) = (self.x, self.y);
        match self.kind {
            MoveKind::AddLink => write!(f, "A_link({x},{y})"),
            MoveKind::AddArc => write!(f, "A_arc({x},{y})"),
            MoveKind::AddHeadToHead => write!(f, "A_hh({x},{y},{})", self.z.unwrap_or(usize::MAX)),
            MoveKind::DeleteArc => write!(f, "D_arc({x},{y})"),
            MoveKind::DeleteLink => write!(f, "D_link({x},{y})"),
        }
    }
}

fn check_well_formed(g: &PartialDag, mv: &Move) -> Result<(), SearchError> {
    let n = g.node_count();
    let bad = |why: &str| Err(SearchError::MalformedMove(format!("{mv}: {why}")));
    if mv.x >= n || mv.y >= n {
        return bad("node out of range");
    }
    if mv.x == mv.y {
        return bad("x and y coincide");
    }
    match (mv.kind, mv.z) {
        (MoveKind::AddHeadToHead, Some(z)) if z >= n => bad("node out of range"),
        (MoveKind::AddHeadToHead, Some(z)) if z == mv.x || z == mv.y => {
            bad("z must differ from x and y")
        }
        (MoveKind::AddHeadToHead, None) => bad("missing z"),
        (MoveKind::AddHeadToHead, Some(_)) => Ok(()),
        (_, Some(_)) => bad("only A_hh takes a third node"),
        (_, None) => Ok(()),
    }
}

/// Whether `mv` yields a valid neighboring RPDAG of `g`.
pub fn is_applicable(g: &PartialDag, mv: &Move) -> Result<bool, SearchError> {
    check_well_formed(g, mv)?;
    let (x, y) = (mv.x, mv.y);
    let px = g.parents(x).len();
    let py = g.parents(y).len();
    let nx = g.neighbors(x).len();
    let ny = g.neighbors(y).len();
    let cy = g.children(y).len();
    let applicable = match mv.kind {
        MoveKind::AddLink => {
            !g.is_adjacent(x, y)
                && px == 0
                && py == 0
                && (nx == 0 || ny == 0 || !g.undirected_reachable(x, y))
        }
        MoveKind::AddArc => {
            !g.is_adjacent(x, y)
                && (px != 0 || py != 0)
                && !(px != 0 && (cy != 0 || ny != 0) && g.partially_directed_reachable(y, x))
        }
        MoveKind::DeleteArc => g.has_arc(x, y),
        MoveKind::DeleteLink => g.has_link(x, y),
        MoveKind::AddHeadToHead => {
            let z = mv.z.expect("checked above");
            // The directed-cycle test runs whenever a path could enter x at all; gating it
            // on n(y) >= 2 alone misses cycles through children of y when n(y) = 1.
            !g.is_adjacent(x, y)
                && g.has_link(y, z)
                && py == 0
                && ny != 0
                && !((px != 0 || nx != 0)
                    && g.partially_directed_reachable_without_link(y, x, Some((y, z))))
        }
    };
    Ok(applicable)
}

/// Applies `mv` in place, followed by the completion or undo cascade it requires.
pub fn apply_in_place(g: &mut PartialDag, mv: &Move) -> Result<(), SearchError> {
    if !is_applicable(g, mv)? {
        return Err(SearchError::InapplicableMove(mv.to_string()));
    }
    let (x, y) = (mv.x, mv.y);
    match mv.kind {
        MoveKind::AddLink => g.add_link(x, y)?,
        MoveKind::AddArc => {
            let complete = !g.parents(x).is_empty() && !g.neighbors(y).is_empty();
            g.add_arc(x, y)?;
            if complete {
                g.complete_cascade(y);
            }
        }
        MoveKind::DeleteArc => {
            let undo = g.parents(y).len() <= 2;
            g.remove_arc(x, y)?;
            if undo {
                g.undo_cascade(y);
            }
        }
        MoveKind::DeleteLink => g.remove_link(x, y)?,
        MoveKind::AddHeadToHead => {
            let z = mv.z.expect("well-formed A_hh");
            let complete = g.neighbors(y).len() >= 2;
            g.orient_link(z, y)?;
            g.add_arc(x, y)?;
            if complete {
                g.complete_cascade(y);
            }
        }
    }
    debug_assert!(g.is_rpdag(), "{mv} produced {g:?}");
    Ok(())
}

/// The neighbor obtained by applying `mv` to `g`.
pub fn apply(g: &PartialDag, mv: &Move) -> Result<PartialDag, SearchError> {
    let mut out = g.clone();
    apply_in_place(&mut out, mv)?;
    Ok(out)
}

/// Score change of applying `mv`, from two local scores of node `y`.
pub fn delta_score(g: &PartialDag, mv: &Move, scorer: &Scorer<'_>) -> Result<f64, SearchError> {
    if !is_applicable(g, mv)? {
        return Err(SearchError::InapplicableMove(mv.to_string()));
    }
    Ok(delta_unchecked(g, mv, scorer)?)
}

pub(crate) fn delta_unchecked(
    g: &PartialDag,
    mv: &Move,
    scorer: &Scorer<'_>,
) -> Result<f64, crate::scoring::ScoreError> {
    let (x, y) = (mv.x, mv.y);
    let pa = || g.parents(y).iter().copied();
    let d = match mv.kind {
        MoveKind::AddLink => scorer.local(y, [x])? - scorer.local(y, [])?,
        MoveKind::AddArc => scorer.local(y, pa().chain([x]))? - scorer.local(y, pa())?,
        MoveKind::AddHeadToHead => {
            let z = mv.z.expect("well-formed A_hh");
            scorer.local(y, [x, z])? - scorer.local(y, [z])?
        }
        MoveKind::DeleteLink => scorer.local(y, [])? - scorer.local(y, [x])?,
        MoveKind::DeleteArc => {
            scorer.local(y, pa().filter(|&p| p != x))? - scorer.local(y, pa())?
        }
    };
    Ok(d)
}

/// Every applicable operator of `g`, sorted in tie-breaking order. Link operators are
/// emitted once per pair with `x < y`.
pub fn enumerate_neighborhood(g: &PartialDag) -> Vec<Move> {
    let mut out = Vec::new();
    let applicable = |mv: &Move| is_applicable(g, mv).unwrap_or(false);
    for a in g.nodes() {
        for b in a + 1..g.node_count() {
            if g.is_adjacent(a, b) {
                if g.has_arc(a, b) {
                    out.push(Move::delete_arc(a, b));
                } else if g.has_arc(b, a) {
                    out.push(Move::delete_arc(b, a));
                } else {
                    out.push(Move::delete_link(a, b));
                }
                continue;
            }
            let mut candidates = vec![
                Move::add_link(a, b),
                Move::add_arc(a, b),
                Move::add_arc(b, a),
            ];
            candidates.extend(g.neighbors(b).iter().map(|&z| Move::add_hh(a, b, z)));
            candidates.extend(g.neighbors(a).iter().map(|&z| Move::add_hh(b, a, z)));
            out.extend(candidates.into_iter().filter(applicable));
        }
    }
    out.sort_unstable();
    out
}
