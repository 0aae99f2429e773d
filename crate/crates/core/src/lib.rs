//! Training-free graph classification with binary hypervectors.
//!
//! Two encoders share one rank basis and one evaluation harness:
//!
//! - **VS-Graph**: spike diffusion ranks nodes by `A^K · 1`, rank hypervectors
//!   are refined by max-aggregation message passing with a residual blend, and
//!   the mean node state is classified against L2-normalized class means.
//! - **GraphHD**: PageRank ranks nodes, edges bind their endpoint vectors, the
//!   graph is the majority bundle of its edges, and classes are majority
//!   bundles compared by Hamming similarity.
//!
//! ```
//! use vsgraph_core::{encode_graph, fit, make_graph, predict, EncoderConfig, SeedSpec};
//! use vsgraph_core::seed::streams;
//! use vsgraph_core::spike::RankBasis;
//!
//! # fn main() -> vsgraph_core::Result<()> {
//! let config = EncoderConfig { dim: 4096, seed: SeedSpec::new(1, streams::BASIS), ..Default::default() };
//! let basis = RankBasis::new(config.seed, config.dim)?;
//! let star = make_graph(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)])?;
//! let path = make_graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])?;
//! let zs = vec![encode_graph(&star, &config, &basis)?, encode_graph(&path, &config, &basis)?];
//! let model = fit(&zs, &[0, 1], 2, config)?;
//! assert_eq!(predict(&model, &zs[1])?, 1);
//! # Ok(())
//! # }
//! ```

pub mod classifier;
pub mod error;
pub mod eval;
pub mod graph;
pub mod graphhd;
pub mod hdc;
pub mod message_passing;
pub mod persist;
pub mod seed;
pub mod spike;
pub mod tudataset;

pub use classifier::{fit, predict, predict_scores, PrototypeModel};
pub use error::{Error, Result};
pub use eval::{
    run_cv, run_dim_sweep, stratified_kfold, CvConfig, CvReport, ModelKind, SweepReport,
};
pub use graph::{make_graph, random_graph, Graph};
pub use graphhd::{
    encode_graphhd, fit_graphhd, pagerank, predict_graphhd, GraphHdModel, PageRankParams,
    PageRankScores,
};
pub use hdc::{
    bind, bundle, cosine_similarity, hamming_similarity, random_hypervector, to_dense,
    BinaryHypervector, DenseHypervector,
};
pub use message_passing::{
    aggregate, blend, encode_graph, AggregationMode, EncoderConfig, GraphEmbedding,
};
pub use persist::SavedModel;
pub use seed::SeedSpec;
pub use spike::{assign_node_hvs, basis_vector, diffuse, rank_nodes, RankBasis};
pub use tudataset::{parse_tudataset, GraphDataset};
