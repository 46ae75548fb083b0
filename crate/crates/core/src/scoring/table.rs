use super::ScoreError;
use crate::data::Dataset;

/// Largest table (`q * r` cells) that will be allocated.
const MAX_CELLS: usize = 1 << 26;

/// Counts `N_jk` of child state `k` under parent configuration `j`.
///
/// Configurations are numbered in mixed radix over the parents in ascending index order,
/// first parent most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    child_cardinality: usize,
    config_count: usize,
    counts: Vec<u64>,
    marginals: Vec<u64>,
}

impl ContingencyTable {
    pub fn from_counts(child_cardinality: usize, counts: Vec<Vec<u64>>) -> Self {
        let config_count = counts.len();
        let marginals = counts.iter().map(|row| row.iter().sum()).collect();
        let flat: Vec<u64> = counts.concat();
        assert_eq!(flat.len(), config_count * child_cardinality);
        ContingencyTable {
            child_cardinality,
            config_count,
            counts: flat,
            marginals,
        }
    }

    pub fn child_cardinality(&self) -> usize {
        self.child_cardinality
    }

    pub fn config_count(&self) -> usize {
        self.config_count
    }

    pub fn count(&self, config: usize, state: usize) -> u64 {
        self.counts[config * self.child_cardinality + state]
    }

    pub fn marginal(&self, config: usize) -> u64 {
        self.marginals[config]
    }

    pub fn row(&self, config: usize) -> &[u64] {
        let r = self.child_cardinality;
        &self.counts[config * r..(config + 1) * r]
    }

    pub fn total(&self) -> u64 {
        self.marginals.iter().sum()
    }

    /// Counts of each child state summed over configurations.
    pub fn child_marginals(&self) -> Vec<u64> {
        let mut out = vec![0; self.child_cardinality];
        for row in self.counts.chunks(self.child_cardinality.max(1)) {
            for (o, &c) in out.iter_mut().zip(row) {
                *o += c;
            }
        }
        out
    }
}

/// Tallies `child` against the joint configuration of `parents` over every row.
pub fn count_statistics(
    data: &Dataset,
    child: usize,
    parents: &[usize],
) -> Result<ContingencyTable, ScoreError> {
    let n = data.variable_count();
    if child >= n {
        return Err(ScoreError::InvalidNode(child));
    }
    let mut parents = parents.to_vec();
    parents.sort_unstable();
    parents.dedup();
    if let Some(&p) = parents.iter().find(|&&p| p >= n) {
        return Err(ScoreError::InvalidNode(p));
    }
    if parents.contains(&child) {
        return Err(ScoreError::ChildInParents(child));
    }
    let r = data.cardinality(child);
    let mut q: usize = 1;
    for &p in &parents {
        q = q
            .checked_mul(data.cardinality(p))
            .filter(|&q| q.saturating_mul(r.max(1)) <= MAX_CELLS)
            .ok_or(ScoreError::TableTooLarge { child })?;
    }
    let mut counts = vec![0u64; q * r];
    let mut marginals = vec![0u64; q];
    let child_col = data.column(child);
    let parent_cols: Vec<(&[u32], usize)> = parents
        .iter()
        .map(|&p| (data.column(p), data.cardinality(p)))
        .collect();
    for (row, &k) in child_col.iter().enumerate() {
        let j = parent_cols
            .iter()
            .fold(0usize, |acc, &(col, card)| acc * card + col[row] as usize);
        counts[j * r + k as usize] += 1;
        marginals[j] += 1;
    }
    Ok(ContingencyTable {
        child_cardinality: r,
        config_count: q,
        counts,
        marginals,
    })
}
