//! Prototype classifier: one L2-normalized mean embedding per class,
//! inference by maximum cosine similarity.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::hdc::{dot, DenseHypervector};
use crate::message_passing::{EncoderConfig, GraphEmbedding};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeModel {
    pub prototypes: Vec<DenseHypervector>,
    pub num_classes: usize,
    pub config: EncoderConfig,
}

impl PrototypeModel {
    pub fn dim(&self) -> usize {
        self.config.dim
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Builds class prototypes in a single pass over the training embeddings.
///
/// Members of each class are summed in lexicographic order of their values,
/// so the result does not depend on the order of the training list.
pub fn fit(
    embeddings: &[GraphEmbedding],
    labels: &[usize],
    num_classes: usize,
    config: EncoderConfig,
) -> Result<PrototypeModel> {
    if embeddings.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} embeddings but {} labels",
            embeddings.len(),
            labels.len()
        )));
    }
    if embeddings.is_empty() {
        return Err(Error::invalid("no training embeddings"));
    }
    let dim = config.dim;
    let mut members: Vec<Vec<&[f64]>> = vec![Vec::new(); num_classes];
    for (z, &y) in embeddings.iter().zip(labels) {
        check_dims(dim, z.dim())?;
        members
            .get_mut(y)
            .ok_or_else(|| {
                Error::invalid(format!("label {y} out of range for {num_classes} classes"))
            })?
            .push(z.vector.values());
    }
    let prototypes = members
        .into_iter()
        .enumerate()
        .map(|(c, mut rows)| {
            if rows.is_empty() {
                return Err(Error::invalid(format!("class {c} has no training graphs")));
            }
            rows.sort_by(|a, b| lexicographic(a, b));
            let mut sum = vec![0.0f64; dim];
            for row in &rows {
                for (s, &x) in sum.iter_mut().zip(*row) {
                    *s += x;
                }
            }
            let inv = 1.0 / rows.len() as f64;
            sum.iter_mut().for_each(|s| *s *= inv);
            Ok(DenseHypervector::from_values(sum)?.normalized())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PrototypeModel {
        prototypes,
        num_classes,
        config,
    })
}

/// Cosine similarity of `z` to every prototype.
pub fn predict_scores(model: &PrototypeModel, z: &GraphEmbedding) -> Result<Vec<f64>> {
    check_dims(model.dim(), z.dim())?;
    let zn = z.vector.normalized();
    Ok(model
        .prototypes
        .iter()
        .map(|p| dot(zn.values(), p.values()))
        .collect())
}

/// Index of the most similar prototype; exact ties go to the smallest index.
pub fn predict(model: &PrototypeModel, z: &GraphEmbedding) -> Result<usize> {
    Ok(argmax(&predict_scores(model, z)?))
}

pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}
