use std::fmt;

use serde::Serialize;

use crate::graph::PartialDag;
use crate::scoring::{ScoreError, Scorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum DagMoveKind {
    Add,
    Delete,
    Reverse,
}

/// An operator on the arc `x -> y`. For `Reverse` the arc exists and becomes `y -> x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DagMove {
    pub kind: DagMoveKind,
    pub x: usize,
    pub y: usize,
}

impl fmt::Display for DagMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            DagMoveKind::Add => "add",
            DagMoveKind::Delete => "delete",
            DagMoveKind::Reverse => "reverse",
        };
        write!(f, "{name}({},{})", self.x, self.y)
    }
}

/// Whether a directed path `x => y` exists that does not use the arc `x -> y`.
fn has_indirect_path(g: &PartialDag, x: usize, y: usize) -> bool {
    let mut seen = vec![false; g.node_count()];
    let mut stack: Vec<usize> = g.children(x).iter().copied().filter(|&c| c != y).collect();
    while let Some(u) = stack.pop() {
        if u == y {
            return true;
        }
        if std::mem::replace(&mut seen[u], true) {
            continue;
        }
        stack.extend(g.children(u).iter().copied().filter(|&c| !seen[c]));
    }
    false
}

/// All legal operators on a DAG, sorted by (kind, x, y).
pub fn enumerate_dag_moves(g: &PartialDag) -> Vec<DagMove> {
    let mut out = Vec::new();
    for x in g.nodes() {
        for y in g.nodes() {
            if x == y {
                continue;
            }
            if g.has_arc(x, y) {
                out.push(DagMove {
                    kind: DagMoveKind::Delete,
                    x,
                    y,
                });
                if !has_indirect_path(g, x, y) {
                    out.push(DagMove {
                        kind: DagMoveKind::Reverse,
                        x,
                        y,
                    });
                }
            } else if !g.is_adjacent(x, y) && !g.directed_reachable(y, x) {
                out.push(DagMove {
                    kind: DagMoveKind::Add,
                    x,
                    y,
                });
            }
        }
    }
    out.sort_unstable();
    out
}

pub(crate) fn apply_dag_move(
    g: &mut PartialDag,
    mv: &DagMove,
) -> Result<(), crate::graph::GraphError> {
    match mv.kind {
        DagMoveKind::Add => g.add_arc(mv.x, mv.y),
        DagMoveKind::Delete => g.remove_arc(mv.x, mv.y),
        DagMoveKind::Reverse => {
            g.remove_arc(mv.x, mv.y)?;
            g.add_arc(mv.y, mv.x)
        }
    }
}

/// Score change of a DAG operator; reversal needs the local scores of both endpoints.
pub fn dag_delta_score(
    g: &PartialDag,
    mv: &DagMove,
    scorer: &Scorer<'_>,
) -> Result<f64, ScoreError> {
    let (x, y) = (mv.x, mv.y);
    let pa = |v: usize| g.parents(v).iter().copied();
    let without_x = || pa(y).filter(move |&p| p != x);
    Ok(match mv.kind {
        DagMoveKind::Add => scorer.local(y, pa(y).chain([x]))? - scorer.local(y, pa(y))?,
        DagMoveKind::Delete => scorer.local(y, without_x())? - scorer.local(y, pa(y))?,
        DagMoveKind::Reverse => {
            scorer.local(y, without_x())? - scorer.local(y, pa(y))?
                + scorer.local(x, pa(x).chain([y]))?
                - scorer.local(x, pa(x))?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::all_dags;
    use crate::scoring::tests::random_dataset;
    use crate::scoring::ScoreKind;

    #[test]
    fn moves_keep_acyclicity_and_cover_all_single_changes() {
        for g in all_dags(4) {
            let moves = enumerate_dag_moves(&g);
            for mv in &moves {
                let mut h = g.clone();
                apply_dag_move(&mut h, mv).unwrap();
                assert!(h.is_dag(), "{g:?} {mv}");
            }
            let adds = moves.iter().filter(|m| m.kind == DagMoveKind::Add).count();
            let legal_adds = (0..4)
                .flat_map(|x| (0..4).map(move |y| (x, y)))
                .filter(|&(x, y)| {
                    x != y && !g.is_adjacent(x, y) && {
                        let mut h = g.clone();
                        h.add_arc(x, y).unwrap();
                        h.is_dag()
                    }
                })
                .count();
            assert_eq!(adds, legal_adds);
            let revs = moves
                .iter()
                .filter(|m| m.kind == DagMoveKind::Reverse)
                .count();
            let legal_revs = g
                .arcs()
                .into_iter()
                .filter(|&(x, y)| {
                    let mut h = g.clone();
                    h.remove_arc(x, y).unwrap();
                    h.add_arc(y, x).unwrap();
                    h.is_dag()
                })
                .count();
            assert_eq!(revs, legal_revs);
        }
    }

    #[test]
    fn deltas_match_rescoring() {
        for (seed, kind) in [(1, ScoreKind::bdeu(1.0)), (2, ScoreKind::Bic)] {
            let data = random_dataset(4, 60, seed);
            let scorer = Scorer::new(&data, kind).unwrap();
            for g in all_dags(4).into_iter().step_by(7) {
                let base = scorer.score_dag(&g).unwrap();
                for mv in enumerate_dag_moves(&g) {
                    let mut h = g.clone();
                    apply_dag_move(&mut h, &mv).unwrap();
                    let want = scorer.score_dag(&h).unwrap() - base;
                    let got = dag_delta_score(&g, &mv, &scorer).unwrap();
                    assert!((got - want).abs() < 1e-9, "{mv}: {got} vs {want}");
                }
            }
        }
    }
}
