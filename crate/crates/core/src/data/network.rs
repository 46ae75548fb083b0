use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};
use crate::graph::PartialDag;

const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
}

/// Conditional probability table of one node.
///
/// `probabilities` is row-major: one row per parent configuration, configurations in
/// mixed-radix order with the first entry of `parents` most significant, and one column
/// per child state.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub parents: Vec<usize>,
    pub probabilities: Vec<f64>,
}

impl Cpt {
    /// Row index of a parent configuration given the full assignment `values`.
    pub fn config_index(&self, values: &[u32], cardinalities: &[usize]) -> usize {
        self.parents
            .iter()
            .fold(0, |acc, &p| acc * cardinalities[p] + values[p] as usize)
    }

    pub fn row(&self, config: usize, child_cardinality: usize) -> &[f64] {
        &self.probabilities[config * child_cardinality..(config + 1) * child_cardinality]
    }
}

/// Contents of a network file: variables, a structure, and optionally parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub variables: Vec<Variable>,
    pub structure: PartialDag,
    pub cpts: Option<Vec<Cpt>>,
}

/// A fully parameterised network over a DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    variables: Vec<Variable>,
    structure: PartialDag,
    cpts: Vec<Cpt>,
}

impl BayesNet {
    pub fn new(
        variables: Vec<Variable>,
        structure: PartialDag,
        cpts: Vec<Cpt>,
    ) -> Result<Self, DataError> {
        let n = variables.len();
        if structure.node_count() != n {
            return Err(DataError::Arity {
                structure: structure.node_count(),
                variables: n,
            });
        }
        if !structure.is_dag() {
            return Err(DataError::InvalidNetwork(
                "structure must be a DAG to carry parameters".into(),
            ));
        }
        if cpts.len() != n {
            return Err(DataError::InvalidNetwork(format!(
                "{} conditional tables for {n} variables",
                cpts.len()
            )));
        }
        for (y, cpt) in cpts.iter().enumerate() {
            let mut listed = cpt.parents.clone();
            listed.sort_unstable();
            let actual: Vec<usize> = structure.parents(y).iter().copied().collect();
            if listed != actual {
                return Err(DataError::InvalidNetwork(format!(
                    "table of `{}` lists parents that differ from the structure",
                    variables[y].name
                )));
            }
            let r = variables[y].states.len();
            if r == 0 {
                return Err(DataError::InvalidNetwork(format!(
                    "variable `{}` has no states",
                    variables[y].name
                )));
            }
            let q: usize = cpt
                .parents
                .iter()
                .map(|&p| variables[p].states.len())
                .product();
            if cpt.probabilities.len() != q * r {
                return Err(DataError::InvalidNetwork(format!(
                    "table of `{}` has {} entries, expected {}",
                    variables[y].name,
                    cpt.probabilities.len(),
                    q * r
                )));
            }
            for (j, row) in cpt.probabilities.chunks(r).enumerate() {
                let sum: f64 = row.iter().sum();
                if row.iter().any(|&p| !(0.0..=1.0).contains(&p))
                    || (sum - 1.0).abs() > ROW_SUM_TOLERANCE
                {
                    return Err(DataError::InvalidNetwork(format!(
                        "row {j} of `{}` is not a distribution (sum {sum})",
                        variables[y].name
                    )));
                }
            }
        }
        Ok(BayesNet {
            variables,
            structure,
            cpts,
        })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn structure(&self) -> &PartialDag {
        &self.structure
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.states.len()).collect()
    }

    /// Probability of a complete assignment.
    pub fn joint_probability(&self, values: &[u32]) -> f64 {
        let card = self.cardinalities();
        self.cpts
            .iter()
            .enumerate()
            .map(|(y, cpt)| cpt.row(cpt.config_index(values, &card), card[y])[values[y] as usize])
            .product()
    }

    /// Variables described the way a [`Dataset`] sampled from this network labels them.
    pub fn matches_dataset(&self, data: &Dataset) -> bool {
        self.variables.len() == data.variable_count()
            && self
                .variables
                .iter()
                .enumerate()
                .all(|(i, v)| v.name == data.names()[i] && v.states == data.state_labels(i))
    }

    pub fn into_network(self) -> Network {
        Network {
            variables: self.variables,
            structure: self.structure,
            cpts: Some(self.cpts),
        }
    }
}

impl TryFrom<Network> for BayesNet {
    type Error = DataError;

    fn try_from(net: Network) -> Result<Self, DataError> {
        match net.cpts {
            Some(cpts) => BayesNet::new(net.variables, net.structure, cpts),
            None => Err(DataError::InvalidNetwork(
                "network file has no conditional probability tables".into(),
            )),
        }
    }
}

impl Network {
    /// A parameter-free network over the variables of a dataset.
    pub fn from_structure(data: &Dataset, structure: PartialDag) -> Network {
        Network {
            variables: (0..data.variable_count())
                .map(|v| Variable {
                    name: data.names()[v].clone(),
                    states: data.state_labels(v).to_vec(),
                })
                .collect(),
            structure,
            cpts: None,
        }
    }

    /// Maps this network's structure onto the variable order of `data`, matching by name.
    pub fn structure_for(&self, data: &Dataset) -> Result<PartialDag, DataError> {
        self.structure_for_names(data.names())
    }

    /// Maps this network's structure onto the given variable order, matching by name.
    pub fn structure_for_names(&self, names: &[String]) -> Result<PartialDag, DataError> {
        if self.variables.len() != names.len() {
            return Err(DataError::Arity {
                structure: self.variables.len(),
                variables: names.len(),
            });
        }
        let map: Vec<usize> = self
            .variables
            .iter()
            .map(|v| {
                names
                    .iter()
                    .position(|n| *n == v.name)
                    .ok_or_else(|| DataError::UnknownVariable(v.name.clone()))
            })
            .collect::<Result<_, _>>()?;
        let relabel = |edges: Vec<(usize, usize)>| -> Vec<(usize, usize)> {
            edges.into_iter().map(|(a, b)| (map[a], map[b])).collect()
        };
        let arcs = relabel(self.structure.arcs());
        let links = relabel(self.structure.links());
        Ok(PartialDag::from_edges(names.len(), &arcs, &links)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    variables: Vec<Variable>,
    edges: EdgesDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cpts: Option<Vec<CptDoc>>,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct EdgesDoc {
    #[serde(default)]
    arcs: Vec<[String; 2]>,
    #[serde(default)]
    links: Vec<[String; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CptDoc {
    node: String,
    #[serde(default)]
    parents: Vec<String>,
    probabilities: Vec<Vec<f64>>,
}

impl Network {
    pub fn to_json(&self) -> String {
        let name = |i: usize| self.variables[i].name.clone();
        let doc = NetworkDoc {
            variables: self.variables.clone(),
            edges: EdgesDoc {
                arcs: self
                    .structure
                    .arcs()
                    .into_iter()
                    .map(|(a, b)| [name(a), name(b)])
                    .collect(),
                links: self
                    .structure
                    .links()
                    .into_iter()
                    .map(|(a, b)| [name(a), name(b)])
                    .collect(),
            },
            cpts: self.cpts.as_ref().map(|cpts| {
                cpts.iter()
                    .enumerate()
                    .map(|(y, c)| CptDoc {
                        node: name(y),
                        parents: c.parents.iter().map(|&p| name(p)).collect(),
                        probabilities: c
                            .probabilities
                            .chunks(self.variables[y].states.len().max(1))
                            .map(<[f64]>::to_vec)
                            .collect(),
                    })
                    .collect()
            }),
        };
        serde_json::to_string_pretty(&doc).expect("network documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Network, DataError> {
        let doc: NetworkDoc = serde_json::from_str(text)?;
        let mut index = HashMap::new();
        for (i, v) in doc.variables.iter().enumerate() {
            if index.insert(v.name.clone(), i).is_some() {
                return Err(DataError::DuplicateName(v.name.clone()));
            }
        }
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| DataError::UnknownVariable(name.to_string()))
        };
        let n = doc.variables.len();
        let mut structure = PartialDag::new(n);
        for [a, b] in &doc.edges.arcs {
            structure.add_arc(lookup(a)?, lookup(b)?)?;
        }
        for [a, b] in &doc.edges.links {
            structure.add_link(lookup(a)?, lookup(b)?)?;
        }
        let cpts = match doc.cpts {
            None => None,
            Some(docs) => {
                let mut slots: Vec<Option<Cpt>> = vec![None; n];
                for c in docs {
                    let y = lookup(&c.node)?;
                    let r = doc.variables[y].states.len();
                    if let Some(row) = c.probabilities.iter().find(|row| row.len() != r) {
                        return Err(DataError::InvalidNetwork(format!(
                            "row of `{}` has {} entries for {r} states",
                            c.node,
                            row.len()
                        )));
                    }
                    let parents = c
                        .parents
                        .iter()
                        .map(|p| lookup(p))
                        .collect::<Result<Vec<_>, _>>()?;
                    if slots[y].is_some() {
                        return Err(DataError::InvalidNetwork(format!(
                            "two tables for `{}`",
                            c.node
                        )));
                    }
                    slots[y] = Some(Cpt {
                        parents,
                        probabilities: c.probabilities.concat(),
                    });
                }
                let cpts = slots
                    .into_iter()
                    .enumerate()
                    .map(|(y, c)| {
                        c.ok_or_else(|| {
                            DataError::InvalidNetwork(format!(
                                "missing table for `{}`",
                                doc.variables[y].name
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Some(cpts)
            }
        };
        let net = Network {
            variables: doc.variables,
            structure,
            cpts,
        };
        if net.cpts.is_some() {
            // validates dimensions, parent sets and row sums
            BayesNet::try_from(net.clone())?;
        }
        Ok(net)
    }
}

pub fn save_network(path: impl AsRef<Path>, net: &Network) -> Result<(), DataError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(net.to_json().as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network, DataError> {
    let mut text = String::new();
    std::io::Read::read_to_string(&mut BufReader::new(File::open(path)?), &mut text)?;
    Network::from_json(&text)
}
