//! Loader for the TUDataset flat-file format.
//!
//! Only the connectivity and graph labels are read:
//!
//! - `<name>_A.txt`: one `row, col` pair of 1-based global node ids per line
//! - `<name>_graph_indicator.txt`: the 1-based graph id of node `i` on line `i`
//! - `<name>_graph_labels.txt`: the raw label of graph `g` on line `g`
//!
//! Attribute and label files for nodes and edges are ignored.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{make_graph, Graph};

#[derive(Debug, Clone, PartialEq)]
pub struct GraphDataset {
    pub name: String,
    pub graphs: Vec<Graph>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    /// Raw label value behind each dense class index.
    pub raw_labels: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub name: String,
    pub num_graphs: usize,
    pub num_classes: usize,
    pub mean_nodes: f64,
    pub mean_edges: f64,
    pub class_counts: Vec<usize>,
    pub edgeless_graphs: usize,
    pub max_nodes: usize,
}

impl GraphDataset {
    /// Builds a dataset from already-dense labels.
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>, labels: Vec<usize>) -> Result<Self> {
        if graphs.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} graphs but {} labels",
                graphs.len(),
                labels.len()
            )));
        }
        let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
        let ds = Self {
            name: name.into(),
            graphs,
            labels,
            num_classes,
            raw_labels: (0..num_classes as i64).collect(),
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    pub fn max_nodes(&self) -> usize {
        self.graphs.iter().map(Graph::num_nodes).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.graphs.is_empty() {
            return Err(Error::invalid("dataset has no graphs"));
        }
        if self.graphs.len() != self.labels.len() {
            return Err(Error::invalid("graph and label counts differ"));
        }
        if let Some(&y) = self.labels.iter().find(|&&y| y >= self.num_classes) {
            return Err(Error::invalid(format!(
                "label {y} out of range for {} classes",
                self.num_classes
            )));
        }
        if let Some(c) = self.class_counts().iter().position(|&n| n == 0) {
            return Err(Error::invalid(format!("class {c} has no graphs")));
        }
        for (i, g) in self.graphs.iter().enumerate() {
            g.validate()
                .map_err(|e| Error::invalid(format!("graph {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn stats(&self) -> DatasetStats {
        let n = self.graphs.len() as f64;
        DatasetStats {
            name: self.name.clone(),
            num_graphs: self.graphs.len(),
            num_classes: self.num_classes,
            mean_nodes: self
                .graphs
                .iter()
                .map(|g| g.num_nodes() as f64)
                .sum::<f64>()
                / n,
            mean_edges: self
                .graphs
                .iter()
                .map(|g| g.num_edges() as f64)
                .sum::<f64>()
                / n,
            class_counts: self.class_counts(),
            edgeless_graphs: self.graphs.iter().filter(|g| g.num_edges() == 0).count(),
            max_nodes: self.max_nodes(),
        }
    }

    /// Subset in the given index order.
    pub fn select(&self, indices: &[usize]) -> (Vec<&Graph>, Vec<usize>) {
        indices
            .iter()
            .map(|&i| (&self.graphs[i], self.labels[i]))
            .unzip()
    }
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_owned()))
        .filter(|(_, l)| !l.is_empty())
        .collect())
}

fn parse_int<T: std::str::FromStr>(path: &Path, line: usize, token: &str) -> Result<T> {
    token.trim().parse().map_err(|_| Error::Format {
        path: path.to_owned(),
        line,
        message: format!("expected an integer, found {token:?}"),
    })
}

fn file(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}_{suffix}.txt"))
}

/// Parses `<dir>/<name>_{A,graph_indicator,graph_labels}.txt`.
pub fn parse_tudataset(dir: impl AsRef<Path>, name: &str) -> Result<GraphDataset> {
    let dir = dir.as_ref();
    let indicator_path = file(dir, name, "graph_indicator");
    let labels_path = file(dir, name, "graph_labels");
    let edges_path = file(dir, name, "A");

    let raw: Vec<i64> = read_lines(&labels_path)?
        .iter()
        .map(|(ln, t)| parse_int(&labels_path, *ln, t))
        .collect::<Result<_>>()?;
    if raw.is_empty() {
        return Err(Error::Format {
            path: labels_path,
            line: 1,
            message: "no graph labels".into(),
        });
    }
    let num_graphs = raw.len();

    // global node -> (graph, local index)
    let mut node_graph = Vec::new();
    let mut sizes = vec![0usize; num_graphs];
    for (ln, t) in read_lines(&indicator_path)? {
        let g: usize = parse_int(&indicator_path, ln, &t)?;
        if g == 0 || g > num_graphs {
            return Err(Error::Format {
                path: indicator_path,
                line: ln,
                message: format!("graph id {g} outside 1..={num_graphs}"),
            });
        }
        node_graph.push((g - 1, sizes[g - 1]));
        sizes[g - 1] += 1;
    }
    if let Some(g) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::Format {
            path: indicator_path,
            line: 0,
            message: format!("graph {} has no nodes", g + 1),
        });
    }

    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_graphs];
    for (ln, t) in read_lines(&edges_path)? {
        let (a, b) = t.split_once(',').ok_or_else(|| Error::Format {
            path: edges_path.clone(),
            line: ln,
            message: format!("expected `row, col`, found {t:?}"),
        })?;
        let a: usize = parse_int(&edges_path, ln, a)?;
        let b: usize = parse_int(&edges_path, ln, b)?;
        let lookup = |id: usize| {
            id.checked_sub(1)
                .and_then(|i| node_graph.get(i))
                .copied()
                .ok_or_else(|| Error::Format {
                    path: edges_path.clone(),
                    line: ln,
                    message: format!("node {id} is not listed in the graph indicator"),
                })
        };
        let (ga, la) = lookup(a)?;
        let (gb, lb) = lookup(b)?;
        if ga != gb {
            return Err(Error::Format {
                path: edges_path.clone(),
                line: ln,
                message: format!("edge ({a}, {b}) joins graphs {} and {}", ga + 1, gb + 1),
            });
        }
        edges[ga].push((la, lb));
    }

    let graphs = sizes
        .iter()
        .zip(&edges)
        .map(|(&n, e)| make_graph(n, e))
        .collect::<Result<Vec<_>>>()?;

    let dense: BTreeMap<i64, usize> = {
        let mut distinct: Vec<i64> = raw.clone();
        distinct.sort_unstable();
        distinct.dedup();
        distinct
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect()
    };
    let labels = raw.iter().map(|v| dense[v]).collect();

    Ok(GraphDataset {
        name: name.to_owned(),
        graphs,
        labels,
        num_classes: dense.len(),
        raw_labels: dense.keys().copied().collect(),
    })
}
