//! Associative message passing and mean readout.
//!
//! Node states start as the binary rank hypervectors. Each layer computes a
//! neighbor message by componentwise max (logical OR on binary inputs, fuzzy
//! OR once states become real-valued) and blends it with the previous state:
//! `h' = alpha * h + (1 - alpha) * m`. All messages of a layer are computed
//! from the previous layer before any node is updated.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::graph::Graph;
use crate::hdc::DenseHypervector;
use crate::seed::{streams, SeedSpec};
use crate::spike::{node_ranks, RankBasis, RankVector};

/// How neighbor states are combined into a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggregationMode {
    /// Componentwise maximum over real-valued states.
    #[default]
    Max,
    /// Threshold neighbor states at 0.5, then logical OR.
    BinarizeOr,
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AggregationMode::Max => "max",
            AggregationMode::BinarizeOr => "binarize-or",
        })
    }
}

impl FromStr for AggregationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(AggregationMode::Max),
            "binarize-or" => Ok(AggregationMode::BinarizeOr),
            _ => Err(Error::invalid(format!(
                "unknown aggregation mode {s:?} (expected `max` or `binarize-or`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub dim: usize,
    /// Spike diffusion hops.
    pub hops: usize,
    /// Message passing layers.
    pub layers: usize,
    /// Weight of the previous state in the residual blend.
    pub alpha: f64,
    /// Seed of the rank basis.
    pub seed: SeedSpec,
    #[serde(default)]
    pub aggregation: AggregationMode,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            dim: 8192,
            hops: 2,
            layers: 2,
            alpha: 0.5,
            seed: SeedSpec::new(0, streams::BASIS),
            aggregation: AggregationMode::Max,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        check_alpha(self.alpha)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha {alpha} outside [0, 1]")));
    }
    Ok(())
}

/// Graph-level embedding `z_G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEmbedding {
    pub vector: DenseHypervector,
}

impl GraphEmbedding {
    pub fn dim(&self) -> usize {
        self.vector.dim()
    }
}

/// Componentwise max over each node's neighbors; isolated nodes get zeros.
pub fn aggregate(graph: &Graph, states: &[DenseHypervector]) -> Result<Vec<DenseHypervector>> {
    if states.len() != graph.num_nodes() {
        return Err(Error::invalid(format!(
            "{} states for {} nodes",
            states.len(),
            graph.num_nodes()
        )));
    }
    let dim = states[0].dim();
    for s in states {
        check_dims(dim, s.dim())?;
    }
    Ok((0..graph.num_nodes())
        .map(|i| {
            let mut m = DenseHypervector::zeros(dim).expect("dim is positive");
            for &j in graph.neighbors(i) {
                max_into(m.values_mut(), states[j].values());
            }
            m
        })
        .collect())
}

/// `alpha * h + (1 - alpha) * m`.
pub fn blend(h: &DenseHypervector, m: &DenseHypervector, alpha: f64) -> Result<DenseHypervector> {
    check_alpha(alpha)?;
    check_dims(h.dim(), m.dim())?;
    let beta = 1.0 - alpha;
    DenseHypervector::from_values(
        h.values()
            .iter()
            .zip(m.values())
            .map(|(&a, &b)| alpha * a + beta * b)
            .collect(),
    )
}

#[inline]
fn max_into(acc: &mut [f64], x: &[f64]) {
    for (a, &b) in acc.iter_mut().zip(x) {
        *a = if b > *a { b } else { *a };
    }
}

#[inline]
fn or_into(acc: &mut [f64], x: &[f64]) {
    for (a, &b) in acc.iter_mut().zip(x) {
        *a = if b >= 0.5 { 1.0 } else { *a };
    }
}

/// Final node states of one graph, stored row-major (`n x dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStates {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl NodeStates {
    pub fn num_nodes(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }
}

fn check_inputs(
    graph: &Graph,
    ranks: &RankVector,
    config: &EncoderConfig,
    basis: &RankBasis,
) -> Result<()> {
    config.validate()?;
    check_dims(config.dim, basis.dim())?;
    if ranks.0.len() != graph.num_nodes() {
        return Err(Error::invalid("rank vector length differs from node count"));
    }
    Ok(())
}

/// Applies `config.layers` synchronous aggregate-then-blend rounds to a
/// row-major `n x width` state matrix. Columns never interact.
fn run_layers(graph: &Graph, h: &mut [f64], width: usize, config: &EncoderConfig) {
    let n = graph.num_nodes();
    let alpha = config.alpha;
    let beta = 1.0 - alpha;
    let mut m = vec![0.0f64; n * width];
    for _ in 0..config.layers {
        m.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..n {
            let msg = &mut m[i * width..(i + 1) * width];
            for &j in graph.neighbors(i) {
                let src = &h[j * width..(j + 1) * width];
                match config.aggregation {
                    AggregationMode::Max => max_into(msg, src),
                    AggregationMode::BinarizeOr => or_into(msg, src),
                }
            }
        }
        for (x, &y) in h.iter_mut().zip(&m) {
            *x = alpha * *x + beta * y;
        }
    }
}

/// Runs message passing from precomputed ranks and returns every node state.
pub fn propagate(
    graph: &Graph,
    ranks: &RankVector,
    config: &EncoderConfig,
    basis: &RankBasis,
) -> Result<NodeStates> {
    check_inputs(graph, ranks, config, basis)?;
    let n = graph.num_nodes();
    let dim = config.dim;
    let mut h = vec![0.0f64; n * dim];
    for (i, &r) in ranks.0.iter().enumerate() {
        let hv = basis.vector(r);
        let row = &mut h[i * dim..(i + 1) * dim];
        for (w, &word) in hv.words().iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                row[w * 64 + b] = 1.0;
                bits &= bits - 1;
            }
        }
    }
    run_layers(graph, &mut h, dim, config);
    Ok(NodeStates { dim, values: h })
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Sums the rows of a row-major matrix in lexicographic row order, then
/// scales by `1 / n`.
fn canonical_mean(values: &[f64], width: usize) -> Vec<f64> {
    let n = values.len() / width;
    let row = |i: usize| &values[i * width..(i + 1) * width];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lexicographic(row(a), row(b)));
    let mut sum = vec![0.0f64; width];
    for i in order {
        for (s, &x) in sum.iter_mut().zip(row(i)) {
            *s += x;
        }
    }
    let inv = 1.0 / n as f64;
    sum.iter_mut().for_each(|s| *s *= inv);
    sum
}

/// Componentwise mean of node states.
///
/// Rows are summed in lexicographic order of their contents, which depends
/// only on the multiset of states, so relabeled graphs give bit-identical sums.
pub fn readout(states: &NodeStates) -> GraphEmbedding {
    GraphEmbedding {
        vector: DenseHypervector::from_values(canonical_mean(&states.values, states.dim))
            .expect("dim is positive"),
    }
}

/// Encodes one graph into `z_G`: spike ranks, rank hypervectors, `layers`
/// rounds of aggregate-then-blend, mean readout.
pub fn encode_graph(
    graph: &Graph,
    config: &EncoderConfig,
    basis: &RankBasis,
) -> Result<GraphEmbedding> {
    let ranks = node_ranks(graph, config.hops);
    encode_with_ranks(graph, &ranks, config, basis)
}

/// Largest rank count for which the column-pattern shortcut is attempted.
const MAX_PATTERN_RANKS: usize = 16;

/// Same as [`encode_graph`] with the diffusion ranks supplied by the caller.
///
/// Every component evolves independently and starts from the bits of the
/// `m` rank vectors at that position, so components sharing an `m`-bit
/// pattern end in the same state. When `2^m` is well below D the layers run
/// once per distinct pattern and the result is scattered back. Patterns are
/// numbered in order of first occurrence, which makes lexicographic order of
/// compressed rows match that of full rows; the output is bit-identical to
/// `readout(propagate(..))`.
pub fn encode_with_ranks(
    graph: &Graph,
    ranks: &RankVector,
    config: &EncoderConfig,
    basis: &RankBasis,
) -> Result<GraphEmbedding> {
    let m = ranks.num_ranks();
    let dim = config.dim;
    if m > MAX_PATTERN_RANKS || (1usize << m) * 2 > dim {
        return Ok(readout(&propagate(graph, ranks, config, basis)?));
    }
    check_inputs(graph, ranks, config, basis)?;

    let mut keys = vec![0u32; dim];
    for r in 0..m {
        let hv = basis.vector(r);
        for (w, &word) in hv.words().iter().enumerate() {
            let chunk = &mut keys[w * 64..(w * 64 + 64).min(dim)];
            for (b, k) in chunk.iter_mut().enumerate() {
                *k |= (((word >> b) & 1) as u32) << r;
            }
        }
    }
    let mut column_of_key = vec![u32::MAX; 1 << m];
    let mut patterns: Vec<u32> = Vec::new();
    let columns: Vec<u32> = keys
        .iter()
        .map(|&k| {
            let slot = &mut column_of_key[k as usize];
            if *slot == u32::MAX {
                *slot = patterns.len() as u32;
                patterns.push(k);
            }
            *slot
        })
        .collect();

    let width = patterns.len();
    let n = graph.num_nodes();
    let mut h = vec![0.0f64; n * width];
    for (i, &r) in ranks.0.iter().enumerate() {
        for (x, &p) in h[i * width..(i + 1) * width].iter_mut().zip(&patterns) {
            *x = ((p >> r) & 1) as f64;
        }
    }
    run_layers(graph, &mut h, width, config);
    let compressed = canonical_mean(&h, width);
    let z = columns.iter().map(|&c| compressed[c as usize]).collect();
    Ok(GraphEmbedding {
        vector: DenseHypervector::from_values(z)?,
    })
}
