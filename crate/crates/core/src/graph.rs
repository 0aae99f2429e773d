//! Undirected simple graphs in compressed sparse row form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::SeedSpec;

/// Immutable undirected simple graph.
///
/// Neighbor lists are sorted ascending, contain no duplicates and no
/// self-loops, and every edge is stored in both directions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    num_edges: usize,
}

impl Graph {
    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    #[inline]
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[self.offsets[node]..self.offsets[node + 1]]
    }

    #[inline]
    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes()).map(|i| self.degree(i)).collect()
    }

    pub fn csr_offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn csr_neighbors(&self) -> &[usize] {
        &self.neighbors
    }

    /// Each undirected edge once, as `(i, j)` with `i < j`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .copied()
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    /// Relabels nodes so that old node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.num_nodes();
        if perm.len() != n {
            return Err(Error::invalid(format!(
                "permutation has {} entries for {n} nodes",
                perm.len()
            )));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid("not a permutation"));
            }
        }
        let edges: Vec<_> = self.edges().map(|(i, j)| (perm[i], perm[j])).collect();
        make_graph(n, &edges)
    }

    /// Checks every structural invariant; used by tests and `validate-dataset`.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_nodes();
        if n == 0 {
            return Err(Error::invalid("graph has no nodes"));
        }
        if self.offsets[0] != 0 || self.offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("csr offsets are not nondecreasing from 0"));
        }
        if self.offsets[n] != self.neighbors.len() || self.neighbors.len() != 2 * self.num_edges {
            return Err(Error::invalid("csr offsets disagree with edge count"));
        }
        for i in 0..n {
            let nb = self.neighbors(i);
            if nb.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "neighbors of {i} not strictly sorted"
                )));
            }
            for &j in nb {
                if j >= n {
                    return Err(Error::invalid(format!("neighbor {j} of {i} out of range")));
                }
                if j == i {
                    return Err(Error::invalid(format!("self-loop at {i}")));
                }
                if self.neighbors(j).binary_search(&i).is_err() {
                    return Err(Error::invalid(format!("edge {i}->{j} has no reverse")));
                }
            }
        }
        Ok(())
    }
}

/// Canonical graph from an arbitrary edge list: symmetrized, deduplicated,
/// self-loops dropped, neighbor lists sorted.
pub fn make_graph(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Graph> {
    if num_nodes == 0 {
        return Err(Error::invalid("graph must have at least one node"));
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
    for &(a, b) in edges {
        if a >= num_nodes || b >= num_nodes {
            return Err(Error::invalid(format!(
                "edge ({a}, {b}) out of range for {num_nodes} nodes"
            )));
        }
        if a != b {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut offsets = Vec::with_capacity(num_nodes + 1);
    let mut neighbors = Vec::new();
    offsets.push(0);
    for mut list in adj {
        list.sort_unstable();
        list.dedup();
        neighbors.extend(list);
        offsets.push(neighbors.len());
    }
    let num_edges = neighbors.len() / 2;
    Ok(Graph {
        offsets,
        neighbors,
        num_edges,
    })
}

/// Erdős–Rényi G(n, p), deterministic in `seed`.
pub fn random_graph(seed: SeedSpec, num_nodes: usize, edge_prob: f64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::invalid(format!(
            "edge probability {edge_prob} outside [0, 1]"
        )));
    }
    let mut edges = Vec::new();
    for i in 0..num_nodes {
        for j in i + 1..num_nodes {
            if seed.unit(i as u64, j as u64) < edge_prob {
                edges.push((i, j));
            }
        }
    }
    make_graph(num_nodes, &edges)
}
