//! Structural and fit metrics of a learned network.

use serde::Serialize;
use thiserror::Error;

use crate::data::Dataset;
use crate::graph::{GraphError, PartialDag};
use crate::scoring::{kl_fit_term, ScoreError, ScoreKind, Scorer};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("node count mismatch: {0} vs {1}")]
    NodeCountMismatch(usize, usize),
    #[error("test data variables differ from training data")]
    VariableMismatch,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

/// Edges added, deleted and inverted relative to a gold DAG; `total = added + deleted + inverted`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct HammingBreakdown {
    pub added: usize,
    pub deleted: usize,
    pub inverted: usize,
    pub total: usize,
}

/// The learned graph as a DAG: links are oriented by the canonical extension.
fn as_dag(g: &PartialDag) -> Result<PartialDag, GraphError> {
    if g.link_count() > 0 {
        g.extend()
    } else if g.is_dag() {
        Ok(g.clone())
    } else {
        Err(GraphError::NotDag)
    }
}

pub fn hamming(learned: &PartialDag, gold: &PartialDag) -> Result<HammingBreakdown, EvalError> {
    if learned.node_count() != gold.node_count() {
        return Err(EvalError::NodeCountMismatch(
            learned.node_count(),
            gold.node_count(),
        ));
    }
    if gold.link_count() > 0 || !gold.is_dag() {
        return Err(GraphError::NotDag.into());
    }
    let learned = as_dag(learned)?;
    let (ls, gs) = (learned.skeleton(), gold.skeleton());
    let added = ls.difference(&gs).count();
    let deleted = gs.difference(&ls).count();
    let inverted = ls
        .intersection(&gs)
        .filter(|&&(a, b)| learned.has_arc(a, b) != gold.has_arc(a, b))
        .count();
    Ok(HammingBreakdown {
        added,
        deleted,
        inverted,
        total: added + deleted + inverted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreValue {
    pub score: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitMetrics {
    pub rows: usize,
    pub scores: Vec<ScoreValue>,
    pub kl_fit_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub edge_count: usize,
    pub train: FitMetrics,
    pub test: Option<FitMetrics>,
    pub hamming: Option<HammingBreakdown>,
}

fn fit(
    structure: &PartialDag,
    data: &Dataset,
    scores: &[ScoreKind],
) -> Result<FitMetrics, EvalError> {
    let dag = as_dag(structure)?;
    let scores = scores
        .iter()
        .map(|&kind| {
            let value = Scorer::new(data, kind)?.score_dag(&dag)?;
            Ok(ScoreValue {
                score: kind.to_string(),
                value,
            })
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(FitMetrics {
        rows: data.row_count(),
        scores,
        kl_fit_term: kl_fit_term(&dag, data)?,
    })
}

/// Scores `structure` on the training data and, when given, on held-out data (counts are
/// re-taken from the test rows), and compares it with a gold DAG.
pub fn evaluate(
    structure: &PartialDag,
    train: &Dataset,
    test: Option<&Dataset>,
    gold: Option<&PartialDag>,
    scores: &[ScoreKind],
) -> Result<Evaluation, EvalError> {
    if structure.node_count() != train.variable_count() {
        return Err(EvalError::NodeCountMismatch(
            structure.node_count(),
            train.variable_count(),
        ));
    }
    if let Some(t) = test {
        if t.names() != train.names() || t.cardinalities() != train.cardinalities() {
            return Err(EvalError::VariableMismatch);
        }
    }
    Ok(Evaluation {
        edge_count: structure.edge_count(),
        train: fit(structure, train, scores)?,
        test: test.map(|t| fit(structure, t, scores)).transpose()?,
        hamming: gold.map(|g| hamming(structure, g)).transpose()?,
    })
}
