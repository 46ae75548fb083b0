use std::collections::VecDeque;
use std::fmt::Display;
use std::time::Instant;

use super::dag::{apply_dag_move, dag_delta_score, enumerate_dag_moves, DagMove, DagMoveKind};
use super::moves::{apply_in_place, delta_unchecked, enumerate_neighborhood, Move};
use super::{
    SearchError, SearchReport, Space, Strategy, TraceStep, IMPROVEMENT_TOLERANCE, TIE_TOLERANCE,
};
use crate::graph::PartialDag;
use crate::scoring::Scorer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Action {
    Insert,
    Delete,
    Reverse,
}

/// What an operator does to an unordered pair of nodes; tabu entries are stored in
/// this form so an inverse covers every operator that would undo the change.
pub(crate) type TabuKey = ((usize, usize), Action);

pub(crate) trait MoveSpace {
    type Move: Copy + Display;
    const SPACE: Space;

    fn neighborhood(&self, g: &PartialDag) -> Vec<Self::Move>;
    fn delta(
        &self,
        g: &PartialDag,
        mv: &Self::Move,
        scorer: &Scorer<'_>,
    ) -> Result<f64, SearchError>;
    fn apply(&self, g: &mut PartialDag, mv: &Self::Move) -> Result<(), SearchError>;
    fn score(&self, g: &PartialDag, scorer: &Scorer<'_>) -> Result<f64, SearchError>;
    fn key(&self, mv: &Self::Move) -> TabuKey;

    fn inverse_key(&self, mv: &Self::Move) -> TabuKey {
        let (pair, action) = self.key(mv);
        let inverse = match action {
            Action::Insert => Action::Delete,
            Action::Delete => Action::Insert,
            Action::Reverse => Action::Reverse,
        };
        (pair, inverse)
    }
}

pub(crate) struct RpdagSpace;
pub(crate) struct DagSpace;

impl MoveSpace for RpdagSpace {
    type Move = Move;
    const SPACE: Space = Space::Rpdag;

    fn neighborhood(&self, g: &PartialDag) -> Vec<Move> {
        enumerate_neighborhood(g)
    }

    fn delta(&self, g: &PartialDag, mv: &Move, scorer: &Scorer<'_>) -> Result<f64, SearchError> {
        Ok(delta_unchecked(g, mv, scorer)?)
    }

    fn apply(&self, g: &mut PartialDag, mv: &Move) -> Result<(), SearchError> {
        apply_in_place(g, mv)
    }

    fn score(&self, g: &PartialDag, scorer: &Scorer<'_>) -> Result<f64, SearchError> {
        Ok(scorer.score_rpdag(g)?)
    }

    fn key(&self, mv: &Move) -> TabuKey {
        let action = if mv.kind.is_insertion() {
            Action::Insert
        } else {
            Action::Delete
        };
        (mv.pair(), action)
    }
}

impl MoveSpace for DagSpace {
    type Move = DagMove;
    const SPACE: Space = Space::Dag;

    fn neighborhood(&self, g: &PartialDag) -> Vec<DagMove> {
        enumerate_dag_moves(g)
    }

    fn delta(&self, g: &PartialDag, mv: &DagMove, scorer: &Scorer<'_>) -> Result<f64, SearchError> {
        Ok(dag_delta_score(g, mv, scorer)?)
    }

    fn apply(&self, g: &mut PartialDag, mv: &DagMove) -> Result<(), SearchError> {
        Ok(apply_dag_move(g, mv)?)
    }

    fn score(&self, g: &PartialDag, scorer: &Scorer<'_>) -> Result<f64, SearchError> {
        Ok(scorer.score_dag(g)?)
    }

    fn key(&self, mv: &DagMove) -> TabuKey {
        let action = match mv.kind {
            DagMoveKind::Add => Action::Insert,
            DagMoveKind::Delete => Action::Delete,
            DagMoveKind::Reverse => Action::Reverse,
        };
        ((mv.x.min(mv.y), mv.x.max(mv.y)), action)
    }
}

struct Run<'s, 'a> {
    scorer: &'s Scorer<'a>,
    started: Instant,
    counters_before: crate::scoring::CacheCounters,
    individuals: u64,
    trace: Vec<TraceStep>,
}

impl<'s, 'a> Run<'s, 'a> {
    fn new(scorer: &'s Scorer<'a>) -> Self {
        Run {
            scorer,
            started: Instant::now(),
            counters_before: scorer.counters(),
            individuals: 0,
            trace: Vec::new(),
        }
    }

    /// Evaluates every admissible move and returns the best, earliest winning ties.
    fn best_move<S: MoveSpace>(
        &mut self,
        space: &S,
        g: &PartialDag,
        mut admissible: impl FnMut(&S::Move, f64) -> bool,
    ) -> Result<Option<(S::Move, f64)>, SearchError> {
        let mut best: Option<(S::Move, f64)> = None;
        for mv in space.neighborhood(g) {
            let d = space.delta(g, &mv, self.scorer)?;
            self.individuals += 1;
            if !admissible(&mv, d) {
                continue;
            }
            if best.is_none_or(|(_, bd)| d > bd + TIE_TOLERANCE) {
                best = Some((mv, d));
            }
        }
        Ok(best)
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        self,
        space: Space,
        strategy: Strategy,
        initial_score: f64,
        best_score: f64,
        iterations: usize,
        best_iteration: usize,
        best: &PartialDag,
    ) -> SearchReport {
        let after = self.scorer.counters();
        let est_ev = after.evaluated - self.counters_before.evaluated;
        let vars = after.variable_count_sum - self.counters_before.variable_count_sum;
        SearchReport {
            space,
            strategy,
            score: self.scorer.kind().to_string(),
            initial_score,
            best_score,
            iterations,
            best_iteration,
            individuals_evaluated: self.individuals,
            est_ev,
            t_est: after.requested - self.counters_before.requested,
            n_vars: if est_ev == 0 {
                0.0
            } else {
                vars as f64 / est_ev as f64
            },
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            edge_count: best.edge_count(),
            trace: self.trace,
        }
    }
}

pub(crate) fn greedy<S: MoveSpace>(
    space: &S,
    scorer: &Scorer<'_>,
    mut g: PartialDag,
) -> Result<(PartialDag, SearchReport), SearchError> {
    let mut run = Run::new(scorer);
    let initial = space.score(&g, scorer)?;
    let mut score = initial;
    let mut iterations = 0;
    while let Some((mv, d)) = run.best_move(space, &g, |_, _| true)? {
        if d <= IMPROVEMENT_TOLERANCE {
            break;
        }
        space.apply(&mut g, &mv)?;
        score += d;
        iterations += 1;
        run.trace.push(TraceStep {
            iteration: iterations,
            operator: Some(mv.to_string()),
            delta: d,
            score,
        });
    }
    let report = run.finish(
        S::SPACE,
        Strategy::Greedy,
        initial,
        score,
        iterations,
        iterations,
        &g,
    );
    Ok((g, report))
}

pub(crate) fn tabu<S: MoveSpace>(
    space: &S,
    scorer: &Scorer<'_>,
    mut g: PartialDag,
    tabu_length: usize,
    iterations: usize,
) -> Result<(PartialDag, SearchReport), SearchError> {
    if iterations == 0 {
        return Err(SearchError::InvalidParameter(
            "tabu iterations must be at least 1".into(),
        ));
    }
    let mut run = Run::new(scorer);
    let initial = space.score(&g, scorer)?;
    let mut score = initial;
    let mut best = g.clone();
    let mut best_score = score;
    let mut best_iteration = 0;
    let mut tabu: VecDeque<TabuKey> = VecDeque::with_capacity(tabu_length + 1);
    for it in 1..=iterations {
        let chosen = run.best_move(space, &g, |mv, d| {
            !tabu.contains(&space.key(mv)) || score + d > best_score + IMPROVEMENT_TOLERANCE
        })?;
        let Some((mv, d)) = chosen else {
            // everything is tabu: let the oldest entry expire
            tabu.pop_front();
            run.trace.push(TraceStep {
                iteration: it,
                operator: None,
                delta: 0.0,
                score,
            });
            continue;
        };
        space.apply(&mut g, &mv)?;
        score += d;
        if tabu_length > 0 {
            tabu.push_back(space.inverse_key(&mv));
            if tabu.len() > tabu_length {
                tabu.pop_front();
            }
        }
        if score > best_score + IMPROVEMENT_TOLERANCE {
            best_score = score;
            best = g.clone();
            best_iteration = it;
        }
        run.trace.push(TraceStep {
            iteration: it,
            operator: Some(mv.to_string()),
            delta: d,
            score,
        });
    }
    let report = run.finish(
        S::SPACE,
        Strategy::Tabu,
        initial,
        best_score,
        iterations,
        best_iteration,
        &best,
    );
    Ok((best, report))
}
