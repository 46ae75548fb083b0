//! Categorical datasets, Bayesian network files, forward sampling and parameter fitting.

mod network;
mod sample;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::graph::GraphError;

pub use network::{load_network, save_network, BayesNet, Cpt, Network, Variable};
pub use sample::{fit_parameters, sample};

pub const DEFAULT_MISSING_TOKEN: &str = "?";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed network file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("empty file")]
    Empty,
    #[error("row {row} has {found} fields, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable {variable}: state index {value} out of range for cardinality {cardinality}")]
    StateOutOfRange {
        variable: usize,
        value: u32,
        cardinality: usize,
    },
    #[error("column lengths differ")]
    ColumnLength,
    #[error("structure has {structure} nodes but there are {variables} variables")]
    Arity { structure: usize, variables: usize },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A table of categorical observations stored column by column.
///
/// Each variable has an ordered list of state labels; cells hold indices into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    names: Vec<String>,
    labels: Vec<Vec<String>>,
    columns: Vec<Vec<u32>>,
    rows: usize,
}

impl Dataset {
    pub fn new(
        names: Vec<String>,
        labels: Vec<Vec<String>>,
        columns: Vec<Vec<u32>>,
    ) -> Result<Self, DataError> {
        if names.len() != labels.len() || names.len() != columns.len() {
            return Err(DataError::ColumnLength);
        }
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(DataError::DuplicateName(n.clone()));
            }
        }
        let rows = columns.first().map_or(0, Vec::len);
        for (v, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(DataError::ColumnLength);
            }
            let r = labels[v].len();
            if let Some(&bad) = col.iter().find(|&&s| s as usize >= r) {
                return Err(DataError::StateOutOfRange {
                    variable: v,
                    value: bad,
                    cardinality: r,
                });
            }
        }
        Ok(Dataset {
            names,
            labels,
            columns,
            rows,
        })
    }

    pub fn variable_count(&self) -> usize {
        self.names.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn cardinality(&self, v: usize) -> usize {
        self.labels[v].len()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.labels.iter().map(Vec::len).collect()
    }

    pub fn state_labels(&self, v: usize) -> &[String] {
        &self.labels[v]
    }

    pub fn column(&self, v: usize) -> &[u32] {
        &self.columns[v]
    }

    pub fn row(&self, r: usize) -> Vec<u32> {
        self.columns.iter().map(|c| c[r]).collect()
    }

    /// Variables with fewer than two states; they carry no information as children.
    pub fn degenerate_variables(&self) -> Vec<usize> {
        (0..self.variable_count())
            .filter(|&v| self.cardinality(v) < 2)
            .collect()
    }

    /// Reads a CSV file. See [`Dataset::from_csv_reader`].
    pub fn load_csv(path: impl AsRef<Path>, missing_token: &str) -> Result<Self, DataError> {
        Self::from_csv_reader(File::open(path)?, missing_token)
    }

    /// Parses comma-separated data with a header row.
    ///
    /// Each column's alphabet is its distinct tokens sorted lexicographically, except that
    /// `missing_token`, when it occurs, becomes an ordinary state placed last.
    pub fn from_csv_reader<R: Read>(reader: R, missing_token: &str) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            Some(h) => h?,
            None => return Err(DataError::Empty),
        };
        let names: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
        let width = names.len();
        let mut raw: Vec<Vec<String>> = vec![Vec::new(); width];
        for (i, rec) in records.enumerate() {
            let rec = rec?;
            if rec.len() != width {
                return Err(DataError::Ragged {
                    row: i + 2,
                    found: rec.len(),
                    expected: width,
                });
            }
            for (col, field) in raw.iter_mut().zip(rec.iter()) {
                col.push(field.trim().to_string());
            }
        }

        let mut labels = Vec::with_capacity(width);
        let mut columns = Vec::with_capacity(width);
        for col in raw {
            let mut alphabet: Vec<String> = col
                .iter()
                .filter(|t| t.as_str() != missing_token)
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if col.iter().any(|t| t == missing_token) {
                alphabet.push(missing_token.to_string());
            }
            let index: HashMap<&str, u32> = alphabet
                .iter()
                .enumerate()
                .map(|(i, s)| (s.as_str(), i as u32))
                .collect();
            columns.push(col.iter().map(|t| index[t.as_str()]).collect());
            labels.push(alphabet);
        }
        Dataset::new(names, labels, columns)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        let file = File::create(path)?;
        self.write_csv(file)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.names)?;
        for r in 0..self.rows {
            w.write_record(
                self.columns
                    .iter()
                    .zip(&self.labels)
                    .map(|(c, l)| l[c[r] as usize].as_str()),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    /// The same data restricted to the first `rows` records.
    pub fn head(&self, rows: usize) -> Dataset {
        let rows = rows.min(self.rows);
        Dataset {
            names: self.names.clone(),
            labels: self.labels.clone(),
            columns: self.columns.iter().map(|c| c[..rows].to_vec()).collect(),
            rows,
        }
    }
}
