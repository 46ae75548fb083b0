use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::{BayesNet, Cpt, Variable};
use super::{DataError, Dataset};
use crate::graph::PartialDag;
use crate::scoring::count_statistics;

/// Draws `rows` i.i.d. records by ancestral sampling.
///
/// The generator is ChaCha8 seeded from `seed`, so output is fixed for a given
/// `(net, rows, seed)`.
pub fn sample(net: &BayesNet, rows: usize, seed: u64) -> Dataset {
    let order = net
        .structure()
        .topological_order()
        .expect("BayesNet structure is acyclic");
    let card = net.cardinalities();
    let n = card.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = vec![Vec::with_capacity(rows); n];
    let mut values = vec![0u32; n];
    for _ in 0..rows {
        for &y in &order {
            let cpt = &net.cpts()[y];
            let dist = cpt.row(cpt.config_index(&values, &card), card[y]);
            values[y] = draw(dist, rng.gen::<f64>());
        }
        for (col, &v) in columns.iter_mut().zip(&values) {
            col.push(v);
        }
    }
    Dataset::new(
        net.variables().iter().map(|v| v.name.clone()).collect(),
        net.variables().iter().map(|v| v.states.clone()).collect(),
        columns,
    )
    .expect("sampled states are within each variable's alphabet")
}

fn draw(dist: &[f64], u: f64) -> u32 {
    let mut acc = 0.0;
    for (k, &p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return k as u32;
        }
    }
    // rounding left u above the cumulative total: take the last state with mass
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u32
}

/// Estimates conditional tables for a DAG from counts.
///
/// Entries are `(N_jk + s/(r q)) / (N_j + s/q)` for smoothing `s`; with `s = 0` this is
/// maximum likelihood, and parent configurations never observed get a uniform row.
pub fn fit_parameters(
    structure: &PartialDag,
    data: &Dataset,
    smoothing: f64,
) -> Result<BayesNet, DataError> {
    if structure.node_count() != data.variable_count() {
        return Err(DataError::Arity {
            structure: structure.node_count(),
            variables: data.variable_count(),
        });
    }
    if !structure.is_dag() {
        return Err(DataError::InvalidNetwork("structure must be a DAG".into()));
    }
    if smoothing.is_nan() || smoothing < 0.0 {
        return Err(DataError::InvalidNetwork(format!(
            "smoothing must be non-negative, got {smoothing}"
        )));
    }
    let mut cpts = Vec::with_capacity(structure.node_count());
    for y in structure.nodes() {
        let parents: Vec<usize> = structure.parents(y).iter().copied().collect();
        let table = count_statistics(data, y, &parents)
            .map_err(|e| DataError::InvalidNetwork(e.to_string()))?;
        let r = table.child_cardinality();
        let q = table.config_count();
        let mut probabilities = Vec::with_capacity(q * r);
        for j in 0..q {
            let nj = table.marginal(j) as f64;
            if smoothing == 0.0 && nj == 0.0 {
                probabilities.extend(std::iter::repeat_n(1.0 / r as f64, r));
                continue;
            }
            let a_jk = smoothing / (r * q) as f64;
            let a_j = smoothing / q as f64;
            probabilities.extend((0..r).map(|k| (table.count(j, k) as f64 + a_jk) / (nj + a_j)));
        }
        cpts.push(Cpt {
            parents,
            probabilities,
        });
    }
    let variables = (0..data.variable_count())
        .map(|v| Variable {
            name: data.names()[v].clone(),
            states: data.state_labels(v).to_vec(),
        })
        .collect();
    BayesNet::new(variables, structure.clone(), cpts)
}
