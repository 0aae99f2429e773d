//! Binary and dense hypervectors and the HDC algebra shared by both encoders.
//!
//! Binary vectors are bit-packed into `u64` words. Bits past `dim - 1` in the
//! last word are always zero, so popcounts are exact for any dimension.

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::seed::{streams, SeedSpec};

/// Regularizer added to norms before division.
pub const NORM_EPS: f64 = 1e-12;

#[inline]
pub(crate) fn words_for(dim: usize) -> usize {
    dim.div_ceil(64)
}

#[inline]
fn tail_mask(dim: usize) -> u64 {
    match dim % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryHypervector {
    dim: usize,
    words: Vec<u64>,
}

impl BinaryHypervector {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(Self {
            dim,
            words: vec![0; words_for(dim)],
        })
    }

    pub fn ones(dim: usize) -> Result<Self> {
        let mut v = Self::zeros(dim)?;
        v.words.iter_mut().for_each(|w| *w = u64::MAX);
        v.clear_tail();
        Ok(v)
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut v = Self::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.words[i / 64] |= 1 << (i % 64);
            }
        }
        Ok(v)
    }

    /// Builds a vector from raw words; tail bits beyond `dim` are cleared.
    pub fn from_words(dim: usize, words: Vec<u64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        check_dims(words_for(dim), words.len())?;
        let mut v = Self { dim, words };
        v.clear_tail();
        Ok(v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Storage footprint of the packed bits.
    pub fn packed_bytes(&self) -> usize {
        self.words.len() * 8
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.dim);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set_bit(&mut self, i: usize, value: bool) {
        assert!(i < self.dim, "bit {i} out of range for dim {}", self.dim);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Bitwise complement.
    pub fn not(&self) -> Self {
        let mut v = Self {
            dim: self.dim,
            words: self.words.iter().map(|w| !w).collect(),
        };
        v.clear_tail();
        v
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.dim).map(move |i| self.bit(i))
    }

    fn clear_tail(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.dim);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseHypervector {
    values: Vec<f64>,
}

impl DenseHypervector {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(Self {
            values: vec![0.0; dim],
        })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        Ok(Self { values })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(dot(&self.values, &other.values))
    }

    pub fn norm(&self) -> f64 {
        dot(&self.values, &self.values).sqrt()
    }

    /// `v / (‖v‖₂ + ε)`.
    pub fn normalized(&self) -> Self {
        let scale = 1.0 / (self.norm() + NORM_EPS);
        Self {
            values: self.values.iter().map(|x| x * scale).collect(),
        }
    }

    /// Thresholds each component at 0.5 (inclusive).
    pub fn binarize(&self) -> BinaryHypervector {
        let mut out = BinaryHypervector::zeros(self.dim()).expect("dense vectors are nonempty");
        for (i, &x) in self.values.iter().enumerate() {
            if x >= 0.5 {
                out.words[i / 64] |= 1 << (i % 64);
            }
        }
        out
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fair-coin hypervector, a pure function of `(seed, index, dim)`.
pub fn random_hypervector(seed: SeedSpec, index: u64, dim: usize) -> Result<BinaryHypervector> {
    if dim == 0 {
        return Err(Error::InvalidDimension(dim));
    }
    let words = (0..words_for(dim) as u64)
        .map(|w| seed.word(index, w))
        .collect();
    BinaryHypervector::from_words(dim, words)
}

/// The fixed vector that resolves exact majority ties in [`bundle`].
pub fn tie_break_vector(master_seed: u64, dim: usize) -> Result<BinaryHypervector> {
    random_hypervector(SeedSpec::new(master_seed, streams::TIE_BREAK), 0, dim)
}

/// XOR binding.
pub fn bind(x: &BinaryHypervector, y: &BinaryHypervector) -> Result<BinaryHypervector> {
    check_dims(x.dim, y.dim)?;
    Ok(BinaryHypervector {
        dim: x.dim,
        words: x.words.iter().zip(&y.words).map(|(a, b)| a ^ b).collect(),
    })
}

pub fn hamming_distance(x: &BinaryHypervector, y: &BinaryHypervector) -> Result<usize> {
    check_dims(x.dim, y.dim)?;
    Ok(x.words
        .iter()
        .zip(&y.words)
        .map(|(a, b)| (a ^ b).count_ones() as usize)
        .sum())
}

/// `1 - popcount(x ^ y) / D`.
pub fn hamming_similarity(x: &BinaryHypervector, y: &BinaryHypervector) -> Result<f64> {
    Ok(1.0 - hamming_distance(x, y)? as f64 / x.dim as f64)
}

/// Per-component vote counter behind majority bundling.
#[derive(Debug, Clone)]
pub struct MajorityAccumulator {
    dim: usize,
    counts: Vec<u32>,
    total: u32,
}

impl MajorityAccumulator {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(Self {
            dim,
            counts: vec![0; dim],
            total: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.total as usize
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn add(&mut self, v: &BinaryHypervector) -> Result<()> {
        check_dims(self.dim, v.dim)?;
        for (w, &word) in v.words.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                self.counts[w * 64 + b] += 1;
                bits &= bits - 1;
            }
        }
        self.total += 1;
        Ok(())
    }

    /// Bit d is set iff strictly more than half the inputs set it; exact ties
    /// copy bit d of `tie_break`.
    pub fn finish(&self, tie_break: &BinaryHypervector) -> Result<BinaryHypervector> {
        if self.total == 0 {
            return Err(Error::invalid("cannot bundle an empty list"));
        }
        check_dims(self.dim, tie_break.dim)?;
        let mut out = BinaryHypervector::zeros(self.dim)?;
        for (d, &c) in self.counts.iter().enumerate() {
            let twice = 2 * c;
            let set = match twice.cmp(&self.total) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => tie_break.bit(d),
            };
            if set {
                out.words[d / 64] |= 1 << (d % 64);
            }
        }
        Ok(out)
    }
}

/// Componentwise majority vote.
pub fn bundle<'a, I>(vs: I, tie_break: &BinaryHypervector) -> Result<BinaryHypervector>
where
    I: IntoIterator<Item = &'a BinaryHypervector>,
{
    let mut iter = vs.into_iter().peekable();
    let first = iter
        .peek()
        .ok_or_else(|| Error::invalid("cannot bundle an empty list"))?;
    let mut acc = MajorityAccumulator::new(first.dim)?;
    for v in iter {
        acc.add(v)?;
    }
    acc.finish(tie_break)
}

/// `u·v / ((‖u‖+ε)(‖v‖+ε))`.
pub fn cosine_similarity(u: &DenseHypervector, v: &DenseHypervector) -> Result<f64> {
    let d = u.dot(v)?;
    Ok(d / ((u.norm() + NORM_EPS) * (v.norm() + NORM_EPS)))
}

pub fn to_dense(x: &BinaryHypervector) -> DenseHypervector {
    DenseHypervector {
        values: x.iter_bits().map(|b| if b { 1.0 } else { 0.0 }).collect(),
    }
}
