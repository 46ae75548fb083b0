use super::{count_statistics, ScoreError};
use crate::data::Dataset;
use crate::graph::{GraphError, PartialDag};

/// Graph-dependent part of the KL divergence between the empirical distribution and the
/// network: the sum over parented nodes of the empirical mutual information between the
/// node and its parent set, in nats. Higher is a better fit.
///
/// Graphs with links are scored through their canonical extension.
pub fn kl_fit_term(graph: &PartialDag, data: &Dataset) -> Result<f64, ScoreError> {
    if graph.node_count() != data.variable_count() {
        return Err(ScoreError::Arity {
            structure: graph.node_count(),
            data: data.variable_count(),
        });
    }
    let dag = if graph.link_count() > 0 {
        graph.extend()?
    } else if graph.is_dag() {
        graph.clone()
    } else {
        return Err(GraphError::NotDag.into());
    };
    let m = data.row_count() as f64;
    if m == 0.0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for y in dag.nodes() {
        let parents: Vec<usize> = dag.parents(y).iter().copied().collect();
        if parents.is_empty() {
            continue;
        }
        let table = count_statistics(data, y, &parents)?;
        let child_marginals = table.child_marginals();
        for j in 0..table.config_count() {
            let nj = table.marginal(j) as f64;
            if nj == 0.0 {
                continue;
            }
            for (k, &njk) in table.row(j).iter().enumerate() {
                if njk > 0 {
                    let njk = njk as f64;
                    total += njk / m * (njk * m / (nj * child_marginals[k] as f64)).ln();
                }
            }
        }
    }
    Ok(total)
}
