//! GraphHD baseline.
//!
//! Nodes are ranked by PageRank and mapped to rank hypervectors from the same
//! basis as the spike-diffusion encoder. Each undirected edge contributes the
//! XOR of its endpoint vectors once, the graph is the majority bundle of its
//! edges, and class prototypes are majority bundles of training graphs.
//! Inference picks the prototype with the highest Hamming similarity.

use serde::{Deserialize, Serialize};

use crate::classifier::argmax;
use crate::error::{check_dims, Error, Result};
use crate::graph::Graph;
use crate::hdc::{
    bind, hamming_similarity, tie_break_vector, BinaryHypervector, MajorityAccumulator,
};
use crate::seed::SeedSpec;
use crate::spike::{dense_rank, RankBasis};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankParams {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tol: 1e-8,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankScores(pub Vec<f64>);

/// Power iteration with uniform teleportation. Isolated nodes spread their
/// mass uniformly.
///
/// The iteration contracts by `damping` in L1, so the distance to the fixed
/// point is at most `change * damping / (1 - damping)`; iteration stops once
/// that bound is below `tol` or after `max_iter` rounds.
pub fn pagerank(graph: &Graph, params: PageRankParams) -> Result<PageRankScores> {
    if !(params.damping > 0.0 && params.damping < 1.0) {
        return Err(Error::invalid(format!(
            "damping {} outside (0, 1)",
            params.damping
        )));
    }
    let n = graph.num_nodes();
    let inv_n = 1.0 / n as f64;
    let d = params.damping;
    let degree: Vec<f64> = graph.degrees().iter().map(|&k| k as f64).collect();
    let mut x = vec![inv_n; n];
    let mut next = vec![0.0; n];
    let mut share = vec![0.0; n];
    for _ in 0..params.max_iter {
        let mut dangling = 0.0;
        for i in 0..n {
            if degree[i] > 0.0 {
                share[i] = x[i] / degree[i];
            } else {
                share[i] = 0.0;
                dangling += x[i];
            }
        }
        let base = (1.0 - d) * inv_n + d * dangling * inv_n;
        let mut change = 0.0;
        for (i, slot) in next.iter_mut().enumerate() {
            let incoming: f64 = graph.neighbors(i).iter().map(|&j| share[j]).sum();
            *slot = base + d * incoming;
            change += (*slot - x[i]).abs();
        }
        std::mem::swap(&mut x, &mut next);
        if change * d / (1.0 - d) < params.tol {
            break;
        }
    }
    Ok(PageRankScores(x))
}

/// Graph hypervector: majority bundle of `B[r_i] ^ B[r_j]` over edges.
///
/// Edgeless graphs encode to the zero vector.
pub fn encode_graphhd(graph: &Graph, basis: &RankBasis) -> Result<BinaryHypervector> {
    encode_graphhd_with(graph, basis, PageRankParams::default())
}

pub fn encode_graphhd_with(
    graph: &Graph,
    basis: &RankBasis,
    params: PageRankParams,
) -> Result<BinaryHypervector> {
    let dim = basis.dim();
    if graph.num_edges() == 0 {
        return BinaryHypervector::zeros(dim);
    }
    let ranks = dense_rank(&pagerank(graph, params)?.0);
    let mut acc = MajorityAccumulator::new(dim)?;
    for (i, j) in graph.edges() {
        acc.add(&bind(&basis.vector(ranks[i]), &basis.vector(ranks[j]))?)?;
    }
    acc.finish(&tie_break_vector(basis.seed().master_seed, dim)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphHdModel {
    pub prototypes: Vec<BinaryHypervector>,
    pub num_classes: usize,
    pub dim: usize,
    pub seed: SeedSpec,
}

/// Majority-bundles precomputed graph hypervectors per class.
pub fn fit_graphhd_encoded(
    encodings: &[BinaryHypervector],
    labels: &[usize],
    num_classes: usize,
    seed: SeedSpec,
) -> Result<GraphHdModel> {
    if encodings.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} encodings but {} labels",
            encodings.len(),
            labels.len()
        )));
    }
    let dim = encodings
        .first()
        .ok_or_else(|| Error::invalid("no training graphs"))?
        .dim();
    let mut accs = (0..num_classes)
        .map(|_| MajorityAccumulator::new(dim))
        .collect::<Result<Vec<_>>>()?;
    for (hv, &y) in encodings.iter().zip(labels) {
        accs.get_mut(y)
            .ok_or_else(|| {
                Error::invalid(format!("label {y} out of range for {num_classes} classes"))
            })?
            .add(hv)?;
    }
    let tie = tie_break_vector(seed.master_seed, dim)?;
    let prototypes = accs
        .iter()
        .enumerate()
        .map(|(c, acc)| {
            if acc.is_empty() {
                return Err(Error::invalid(format!("class {c} has no training graphs")));
            }
            acc.finish(&tie)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GraphHdModel {
        prototypes,
        num_classes,
        dim,
        seed,
    })
}

pub fn fit_graphhd(
    graphs: &[&Graph],
    labels: &[usize],
    basis: &RankBasis,
    num_classes: usize,
) -> Result<GraphHdModel> {
    let encodings = graphs
        .iter()
        .map(|g| encode_graphhd(g, basis))
        .collect::<Result<Vec<_>>>()?;
    fit_graphhd_encoded(&encodings, labels, num_classes, basis.seed())
}

pub fn graphhd_scores(model: &GraphHdModel, g: &BinaryHypervector) -> Result<Vec<f64>> {
    check_dims(model.dim, g.dim())?;
    model
        .prototypes
        .iter()
        .map(|p| hamming_similarity(g, p))
        .collect()
}

/// Most Hamming-similar prototype; ties go to the smallest class index.
pub fn predict_graphhd(model: &GraphHdModel, g: &BinaryHypervector) -> Result<usize> {
    Ok(argmax(&graphhd_scores(model, g)?))
}
