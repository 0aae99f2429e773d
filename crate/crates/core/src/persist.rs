//! Binary model container.
//!
//! All integers and floats are little-endian.
//!
//! | offset | size | field                                            |
//! |-------:|-----:|--------------------------------------------------|
//! | 0      | 4    | magic `VSGM`                                     |
//! | 4      | 4    | format version (`u32`, currently 1)              |
//! | 8      | 1    | kind: 0 = prototype (vsgraph), 1 = graphhd       |
//! | 9      | 1    | aggregation: 0 = max, 1 = binarize-or            |
//! | 10     | 2    | reserved, zero                                   |
//! | 12     | 8    | dimension D (`u64`)                              |
//! | 20     | 8    | class count C (`u64`)                            |
//! | 28     | 8    | alpha (`f64`)                                    |
//! | 36     | 4    | diffusion hops K (`u32`)                         |
//! | 40     | 4    | message passing layers L (`u32`)                 |
//! | 44     | 8    | basis master seed (`u64`)                        |
//! | 52     | 8    | basis stream id (`u64`)                          |
//! | 60     | ...  | payload                                          |
//!
//! The prototype payload is C rows of D `f64` values. The GraphHD payload is
//! C rows of `ceil(D / 64)` `u64` words, bit `d` of a row being bit `d % 64`
//! of word `d / 64`. For GraphHD models alpha, K and L are written as zero.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::classifier::PrototypeModel;
use crate::error::{Error, Result};
use crate::graphhd::GraphHdModel;
use crate::hdc::{words_for, BinaryHypervector, DenseHypervector};
use crate::message_passing::{AggregationMode, EncoderConfig};
use crate::seed::SeedSpec;

pub const MAGIC: [u8; 4] = *b"VSGM";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    VsGraph(PrototypeModel),
    GraphHd(GraphHdModel),
}

impl SavedModel {
    pub fn dim(&self) -> usize {
        match self {
            SavedModel::VsGraph(m) => m.dim(),
            SavedModel::GraphHd(m) => m.dim,
        }
    }

    pub fn num_classes(&self) -> usize {
        match self {
            SavedModel::VsGraph(m) => m.num_classes,
            SavedModel::GraphHd(m) => m.num_classes,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SavedModel::VsGraph(_) => "vsgraph",
            SavedModel::GraphHd(_) => "graphhd",
        }
    }
}

pub fn encode_model(model: &SavedModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let (kind, cfg, seed) = match model {
        SavedModel::VsGraph(m) => (0u8, Some(m.config), m.config.seed),
        SavedModel::GraphHd(m) => (1u8, None, m.seed),
    };
    out.push(kind);
    out.push(match cfg.map(|c| c.aggregation) {
        Some(AggregationMode::BinarizeOr) => 1,
        _ => 0,
    });
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&(model.dim() as u64).to_le_bytes());
    out.extend_from_slice(&(model.num_classes() as u64).to_le_bytes());
    out.extend_from_slice(&cfg.map_or(0.0, |c| c.alpha).to_le_bytes());
    out.extend_from_slice(&(cfg.map_or(0, |c| c.hops) as u32).to_le_bytes());
    out.extend_from_slice(&(cfg.map_or(0, |c| c.layers) as u32).to_le_bytes());
    out.extend_from_slice(&seed.master_seed.to_le_bytes());
    out.extend_from_slice(&seed.stream_id.to_le_bytes());
    debug_assert_eq!(out.len(), HEADER_LEN);
    match model {
        SavedModel::VsGraph(m) => {
            for p in &m.prototypes {
                for v in p.values() {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        SavedModel::GraphHd(m) => {
            for p in &m.prototypes {
                for w in p.words() {
                    out.extend_from_slice(&w.to_le_bytes());
                }
            }
        }
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::ModelFormat("truncated file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<SavedModel> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err(Error::ModelFormat("bad magic, not a model file".into()));
    }
    let version = c.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let [kind, aggregation, _, _] = c.array::<4>()?;
    let dim = c.u64()? as usize;
    let num_classes = c.u64()? as usize;
    let alpha = c.f64()?;
    let hops = c.u32()? as usize;
    let layers = c.u32()? as usize;
    let seed = SeedSpec::new(c.u64()?, c.u64()?);
    if dim == 0 || num_classes == 0 {
        return Err(Error::ModelFormat(format!(
            "invalid header: dim {dim}, classes {num_classes}"
        )));
    }
    let aggregation = match aggregation {
        0 => AggregationMode::Max,
        1 => AggregationMode::BinarizeOr,
        a => return Err(Error::ModelFormat(format!("unknown aggregation code {a}"))),
    };
    let model = match kind {
        0 => {
            let mut prototypes = Vec::with_capacity(num_classes);
            for _ in 0..num_classes {
                let row = (0..dim).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
                prototypes.push(DenseHypervector::from_values(row)?);
            }
            SavedModel::VsGraph(PrototypeModel {
                prototypes,
                num_classes,
                config: EncoderConfig {
                    dim,
                    hops,
                    layers,
                    alpha,
                    seed,
                    aggregation,
                },
            })
        }
        1 => {
            let mut prototypes = Vec::with_capacity(num_classes);
            for _ in 0..num_classes {
                let words = (0..words_for(dim))
                    .map(|_| c.u64())
                    .collect::<Result<Vec<_>>>()?;
                prototypes.push(BinaryHypervector::from_words(dim, words)?);
            }
            SavedModel::GraphHd(GraphHdModel {
                prototypes,
                num_classes,
                dim,
                seed,
            })
        }
        k => return Err(Error::ModelFormat(format!("unknown model kind {k}"))),
    };
    if c.pos != bytes.len() {
        return Err(Error::ModelFormat(format!(
            "{} trailing bytes",
            bytes.len() - c.pos
        )));
    }
    Ok(model)
}

pub fn write_model(path: impl AsRef<Path>, model: &SavedModel) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode_model(model))
        .map_err(|e| Error::io(path, e))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hdc::random_hypervector;
    use crate::seed::streams;
    use proptest::prelude::*;

    fn vsgraph_model(seed: u64, dim: usize, classes: usize) -> SavedModel {
        let s = SeedSpec::new(seed, streams::BASIS);
        SavedModel::VsGraph(PrototypeModel {
            prototypes: (0..classes as u64)
                .map(|c| {
                    DenseHypervector::from_values((0..dim as u64).map(|d| s.unit(c, d)).collect())
                        .unwrap()
                        .normalized()
                })
                .collect(),
            num_classes: classes,
            config: EncoderConfig {
                dim,
                hops: 3,
                layers: 2,
                alpha: 0.3,
                seed: s,
                aggregation: AggregationMode::BinarizeOr,
            },
        })
    }

    fn graphhd_model(seed: u64, dim: usize, classes: usize) -> SavedModel {
        let s = SeedSpec::new(seed, streams::BASIS);
        SavedModel::GraphHd(GraphHdModel {
            prototypes: (0..classes as u64)
                .map(|c| random_hypervector(s, c, dim).unwrap())
                .collect(),
            num_classes: classes,
            dim,
            seed: s,
        })
    }

    #[test]
    fn header_layout() {
        let bytes = encode_model(&vsgraph_model(1, 3, 2));
        assert_eq!(&bytes[..4], b"VSGM");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(bytes[8], 0);
        assert_eq!(bytes[9], 1);
        assert_eq!(u64::from_le_bytes(bytes[12..20].try_into().unwrap()), 3);
        assert_eq!(bytes.len(), HEADER_LEN + 2 * 3 * 8);
        let hd = encode_model(&graphhd_model(1, 65, 2));
        assert_eq!(hd.len(), HEADER_LEN + 2 * 2 * 8);
    }

    #[test]
    fn rejects_other_versions() {
        let mut bytes = encode_model(&vsgraph_model(1, 4, 2));
        bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(
            decode_model(&bytes),
            Err(Error::UnsupportedVersion {
                found: 2,
                expected: 1
            })
        ));
    }

    #[test]
    fn rejects_corruption() {
        let bytes = encode_model(&graphhd_model(2, 100, 3));
        assert!(decode_model(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_model(&extra).is_err());
        let mut magic = bytes;
        magic[0] = b'X';
        assert!(matches!(decode_model(&magic), Err(Error::ModelFormat(_))));
    }

    #[test]
    fn file_roundtrip() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("m.bin");
        let m = vsgraph_model(5, 64, 3);
        write_model(&path, &m).unwrap();
        assert_eq!(read_model(&path).unwrap(), m);
        assert!(read_model(tmp.path().join("missing.bin")).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(seed in any::<u64>(), dim in 1usize..300, classes in 1usize..5, hd in any::<bool>()) {
            let m = if hd { graphhd_model(seed, dim, classes) } else { vsgraph_model(seed, dim, classes) };
            let back = decode_model(&encode_model(&m)).unwrap();
            prop_assert_eq!(encode_model(&back), encode_model(&m));
            prop_assert_eq!(back, m);
        }
    }
}
