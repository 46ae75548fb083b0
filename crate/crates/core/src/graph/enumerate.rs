//! Exhaustive enumeration of small DAGs and the census of their equivalence classes
//! and RPDAG representatives.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::rpdag::is_extension;
use super::{EdgeLists, PartialDag};

/// Every labelled DAG on `n` nodes, in a fixed order. Grows as 3^(n(n-1)/2): keep n small.
pub fn all_dags(n: usize) -> Vec<PartialDag> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    let mut arcs = Vec::with_capacity(pairs.len());
    for code in 0..total {
        arcs.clear();
        let mut c = code;
        for &(i, j) in &pairs {
            match c % 3 {
                1 => arcs.push((i, j)),
                2 => arcs.push((j, i)),
                _ => {}
            }
            c /= 3;
        }
        let g = PartialDag::from_edges(n, &arcs, &[]).expect("distinct pairs");
        if !g.has_directed_cycle() {
            out.push(g);
        }
    }
    out
}

/// Counts of DAGs, Markov equivalence classes and RPDAGs on `node_count` nodes, with the
/// outcome of the partition checks.
#[derive(Debug, Clone, Serialize)]
pub struct Census {
    pub node_count: usize,
    pub dag_count: usize,
    /// Classes keyed by skeleton and v-structures.
    pub class_count: usize,
    /// Distinct RPDAGs, equivalently distinct skeleton + h-h pattern keys.
    pub rpdag_count: usize,
    /// Whether every DAG was checked against every RPDAG (done for `node_count <= 4`).
    pub pairwise_disjointness_checked: bool,
    pub failures: Vec<String>,
}

impl Census {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn run(node_count: usize) -> Census {
        let dags = all_dags(node_count);
        let mut failures = Vec::new();

        let classes: BTreeSet<_> = dags
            .iter()
            .map(|h| (h.skeleton(), h.v_structures()))
            .collect();

        // representative RPDAG -> (keys seen, number of DAGs mapped to it)
        let mut groups: BTreeMap<EdgeLists, (BTreeSet<_>, u128)> = BTreeMap::new();
        let mut reps = Vec::with_capacity(dags.len());
        for h in &dags {
            let r = match h.reduce_to_rpdag() {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("{h:?}: reduction failed: {e}"));
                    continue;
                }
            };
            if let Err(v) = r.check_rpdag() {
                failures.push(format!("{h:?}: reduced graph {r:?} is not an RPDAG ({v})"));
            }
            if !is_extension(&r, h).unwrap_or(false) {
                failures.push(format!("{h:?} does not extend its reduction {r:?}"));
            }
            let key = h.equivalence_key().expect("enumerated graphs are DAGs");
            let entry = groups.entry((r.arcs(), r.links())).or_default();
            entry.0.insert(key);
            entry.1 += 1;
            reps.push(r);
        }

        let mut key_owner = BTreeMap::new();
        for (rep, (keys, size)) in &groups {
            if keys.len() != 1 {
                failures.push(format!(
                    "RPDAG {rep:?} groups DAGs with {} keys",
                    keys.len()
                ));
            }
            for k in keys {
                if let Some(prev) = key_owner.insert(k.clone(), rep.clone()) {
                    failures.push(format!("key shared by RPDAGs {prev:?} and {rep:?}"));
                }
            }
            let g = PartialDag::from_edges(node_count, &rep.0, &rep.1).expect("valid edges");
            match g.count_extensions() {
                Ok(c) if c == *size => {}
                Ok(c) => failures.push(format!("{g:?}: {c} extensions counted, {size} found")),
                Err(e) => failures.push(format!("{g:?}: {e}")),
            }
        }

        let pairwise = node_count <= 4;
        if pairwise {
            let distinct: BTreeSet<_> = reps.iter().map(|r| (r.arcs(), r.links())).collect();
            for (arcs, links) in &distinct {
                let g = PartialDag::from_edges(node_count, arcs, links).expect("valid edges");
                for (h, r) in dags.iter().zip(&reps) {
                    let expected = r == &g;
                    if is_extension(&g, h).unwrap_or(!expected) != expected {
                        failures.push(format!("membership of {h:?} in Ext({g:?}) is wrong"));
                    }
                }
            }
        }

        let rpdag_count = groups.len();
        if rpdag_count < classes.len() || rpdag_count > dags.len() {
            failures.push(format!(
                "RPDAG count {rpdag_count} outside [{}, {}]",
                classes.len(),
                dags.len()
            ));
        }

        Census {
            node_count,
            dag_count: dags.len(),
            class_count: classes.len(),
            rpdag_count,
            pairwise_disjointness_checked: pairwise,
            failures,
        }
    }
}
