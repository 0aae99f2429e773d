//! Spike diffusion: topology-derived node identifiers.
//!
//! Every node starts with a unit spike; each hop replaces a node's value with
//! the sum of its neighbors' previous values. The resulting responses are
//! ranked densely (largest response = rank 0) and each rank indexes a shared
//! random basis hypervector, so structurally equivalent nodes in different
//! graphs receive the same symbol.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hdc::{random_hypervector, BinaryHypervector};
use crate::seed::SeedSpec;

/// Relative tolerance under which two responses count as tied.
pub const RANK_TIE_TOLERANCE: f64 = 1e-9;

/// Per-node nonnegative spike responses.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeVector(pub Vec<f64>);

/// Dense descending ranks: rank 0 is the largest response, ties share a rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankVector(pub Vec<usize>);

impl RankVector {
    /// Number of distinct ranks.
    pub fn num_ranks(&self) -> usize {
        self.0.iter().max().map_or(0, |&m| m + 1)
    }
}

/// `K` synchronous hops of neighbor summation from the all-ones vector.
///
/// After each hop the values are divided by their maximum (when positive),
/// which keeps them in `[0, 1]` without changing any order relation.
pub fn diffuse(graph: &Graph, hops: usize) -> SpikeVector {
    let n = graph.num_nodes();
    let mut current = vec![1.0f64; n];
    let mut next = vec![0.0f64; n];
    for _ in 0..hops {
        for (i, slot) in next.iter_mut().enumerate() {
            *slot = graph.neighbors(i).iter().map(|&j| current[j]).sum();
        }
        let max = next.iter().copied().fold(0.0, f64::max);
        if max > 0.0 {
            next.iter_mut().for_each(|v| *v /= max);
        }
        std::mem::swap(&mut current, &mut next);
    }
    SpikeVector(current)
}

#[inline]
fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= RANK_TIE_TOLERANCE * a.abs().max(b.abs())
}

/// Dense descending ranking of arbitrary scores.
///
/// A new rank starts whenever a value is not tied with the first member of
/// the current tie class, so ties never chain across a long run of values.
pub fn dense_rank(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut ranks = vec![0; values.len()];
    let mut rank = 0;
    let mut leader = match order.first() {
        Some(&i) => values[i],
        None => return ranks,
    };
    for &i in &order {
        if !tied(values[i], leader) {
            rank += 1;
            leader = values[i];
        }
        ranks[i] = rank;
    }
    ranks
}

pub fn rank_nodes(spikes: &SpikeVector) -> RankVector {
    RankVector(dense_rank(&spikes.0))
}

/// Shared item memory mapping rank `r` to a fixed random hypervector.
///
/// Vectors are materialized up front to `capacity`; anything beyond is
/// generated on demand and is bit-identical to what a larger basis would hold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankBasis {
    seed: SeedSpec,
    dim: usize,
    vectors: Vec<BinaryHypervector>,
}

impl RankBasis {
    pub fn new(seed: SeedSpec, dim: usize) -> Result<Self> {
        Self::with_capacity(seed, dim, 0)
    }

    pub fn with_capacity(seed: SeedSpec, dim: usize, capacity: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        let mut basis = Self {
            seed,
            dim,
            vectors: Vec::new(),
        };
        basis.reserve(capacity);
        Ok(basis)
    }

    /// Materializes ranks `0..capacity`.
    pub fn reserve(&mut self, capacity: usize) {
        while self.vectors.len() < capacity {
            let r = self.vectors.len() as u64;
            self.vectors.push(
                random_hypervector(self.seed, r, self.dim).expect("dim checked at construction"),
            );
        }
    }

    pub fn capacity(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> SeedSpec {
        self.seed
    }

    pub fn vector(&self, rank: usize) -> Cow<'_, BinaryHypervector> {
        match self.vectors.get(rank) {
            Some(v) => Cow::Borrowed(v),
            None => Cow::Owned(
                random_hypervector(self.seed, rank as u64, self.dim)
                    .expect("dim checked at construction"),
            ),
        }
    }
}

pub fn basis_vector(basis: &RankBasis, rank: usize) -> BinaryHypervector {
    basis.vector(rank).into_owned()
}

pub fn node_ranks(graph: &Graph, hops: usize) -> RankVector {
    rank_nodes(&diffuse(graph, hops))
}

/// `B[rank(i)]` for every node `i`.
pub fn assign_node_hvs(graph: &Graph, hops: usize, basis: &RankBasis) -> Vec<BinaryHypervector> {
    node_ranks(graph, hops)
        .0
        .into_iter()
        .map(|r| basis_vector(basis, r))
        .collect()
}
