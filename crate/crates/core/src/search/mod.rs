//! Local search over RPDAGs and, as a baseline, over DAGs.

mod dag;
mod driver;
mod moves;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::data::Dataset;
use crate::graph::{GraphError, PartialDag};
use crate::scoring::{ScoreError, ScoreKind, Scorer};

pub use dag::{dag_delta_score, enumerate_dag_moves, DagMove, DagMoveKind};
pub use moves::{
    apply, apply_in_place, delta_score, enumerate_neighborhood, is_applicable, Move, MoveKind,
};

/// Moves whose deltas differ by less than this are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;
/// Smallest delta counted as an improvement.
pub const IMPROVEMENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("malformed operator {0}")]
    MalformedMove(String),
    #[error("operator {0} is not applicable")]
    InapplicableMove(String),
    #[error("invalid start structure: {0}")]
    InvalidStart(String),
    #[error("invalid search parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    #[default]
    Rpdag,
    Dag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Greedy,
    Tabu,
}

impl FromStr for Space {
    type Err = SearchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rpdag" => Ok(Space::Rpdag),
            "dag" => Ok(Space::Dag),
            _ => Err(SearchError::InvalidParameter(format!(
                "unknown space {s:?}"
            ))),
        }
    }
}

impl FromStr for Strategy {
    type Err = SearchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy" => Ok(Strategy::Greedy),
            "tabu" => Ok(Strategy::Tabu),
            _ => Err(SearchError::InvalidParameter(format!(
                "unknown strategy {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Rpdag => "rpdag",
            Space::Dag => "dag",
        })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Greedy => "greedy",
            Strategy::Tabu => "tabu",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct SearchConfig {
    pub space: Space,
    pub strategy: Strategy,
    /// Tabu list length; `None` means the number of variables.
    pub tabu_length: Option<usize>,
    /// Tabu iterations; `None` means `n (n - 1)`.
    pub tabu_iterations: Option<usize>,
    /// Starting structure; the empty graph when absent.
    pub start: Option<PartialDag>,
}

impl SearchConfig {
    pub fn new(space: Space, strategy: Strategy) -> Self {
        SearchConfig {
            space,
            strategy,
            ..Default::default()
        }
    }

    pub fn tabu_length_for(&self, n: usize) -> usize {
        self.tabu_length.unwrap_or(n)
    }

    pub fn tabu_iterations_for(&self, n: usize) -> usize {
        self.tabu_iterations.unwrap_or(n * n.saturating_sub(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub iteration: usize,
    /// `None` when every move was tabu.
    pub operator: Option<String>,
    pub delta: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub space: Space,
    pub strategy: Strategy,
    pub score: String,
    pub initial_score: f64,
    pub best_score: f64,
    /// Iter: operators applied (for tabu, iterations executed).
    pub iterations: usize,
    /// BIter: iteration at which the best structure was reached.
    pub best_iteration: usize,
    /// Ind: operator deltas evaluated.
    pub individuals_evaluated: u64,
    /// EstEv: local scores computed during the run.
    pub est_ev: u64,
    /// TEst: local scores requested during the run.
    pub t_est: u64,
    /// NVars: mean family size of the computed local scores.
    pub n_vars: f64,
    pub wall_time_seconds: f64,
    /// Edg: edges of the returned structure.
    pub edge_count: usize,
    pub trace: Vec<TraceStep>,
}

/// Runs the search selected by `config`.
pub fn learn(
    scorer: &Scorer<'_>,
    config: &SearchConfig,
) -> Result<(PartialDag, SearchReport), SearchError> {
    match (config.space, config.strategy) {
        (Space::Rpdag, Strategy::Greedy) => greedy_search(scorer, config),
        (Space::Rpdag, Strategy::Tabu) => tabu_search(scorer, config),
        (Space::Dag, Strategy::Greedy) => dag_greedy_search(scorer, config),
        (Space::Dag, Strategy::Tabu) => dag_tabu_search(scorer, config),
    }
}

/// Convenience wrapper that builds a fresh scorer for `data`.
pub fn learn_from_data(
    data: &Dataset,
    score: ScoreKind,
    config: &SearchConfig,
) -> Result<(PartialDag, SearchReport), SearchError> {
    let scorer = Scorer::new(data, score)?;
    learn(&scorer, config)
}

fn start_state(
    scorer: &Scorer<'_>,
    config: &SearchConfig,
    space: Space,
) -> Result<PartialDag, SearchError> {
    let n = scorer.data().variable_count();
    let Some(start) = &config.start else {
        return Ok(PartialDag::new(n));
    };
    if start.node_count() != n {
        return Err(SearchError::InvalidStart(format!(
            "{} nodes, data has {n} variables",
            start.node_count()
        )));
    }
    match space {
        Space::Rpdag if start.is_dag() => Ok(start.reduce_to_rpdag()?),
        Space::Rpdag => {
            start
                .check_rpdag()
                .map_err(|v| SearchError::InvalidStart(v.to_string()))?;
            Ok(start.clone())
        }
        Space::Dag if start.link_count() > 0 => Ok(start.extend()?),
        Space::Dag if start.is_dag() => Ok(start.clone()),
        Space::Dag => Err(SearchError::InvalidStart(
            "contains a directed cycle".into(),
        )),
    }
}

/// Hill climbing over RPDAGs: applies the best strictly improving operator until none is left.
pub fn greedy_search(
    scorer: &Scorer<'_>,
    config: &SearchConfig,
) -> Result<(PartialDag, SearchReport), SearchError> {
    let start = start_state(scorer, config, Space::Rpdag)?;
    driver::greedy(&driver::RpdagSpace, scorer, start)
}

/// Tabu search over RPDAGs for exactly `tsit` iterations, returning the best structure seen.
pub fn tabu_search(
    scorer: &Scorer<'_>,
    config: &SearchConfig,
) -> Result<(PartialDag, SearchReport), SearchError> {
    let start = start_state(scorer, config, Space::Rpdag)?;
    let n = start.node_count();
    driver::tabu(
        &driver::RpdagSpace,
        scorer,
        start,
        config.tabu_length_for(n),
        config.tabu_iterations_for(n),
    )
}

/// Hill climbing over DAGs with arc addition, deletion and reversal.
pub fn dag_greedy_search(
    scorer: &Scorer<'_>,
    config: &SearchConfig,
) -> Result<(PartialDag, SearchReport), SearchError> {
    let start = start_state(scorer, config, Space::Dag)?;
    driver::greedy(&driver::DagSpace, scorer, start)
}

pub fn dag_tabu_search(
    scorer: &Scorer<'_>,
    config: &SearchConfig,
) -> Result<(PartialDag, SearchReport), SearchError> {
    let start = start_state(scorer, config, Space::Dag)?;
    let n = start.node_count();
    driver::tabu(
        &driver::DagSpace,
        scorer,
        start,
        config.tabu_length_for(n),
        config.tabu_iterations_for(n),
    )
}
