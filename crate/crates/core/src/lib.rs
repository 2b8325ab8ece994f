//! Random block model hosts that contain every bounded-degeneracy graph on
//! `n` vertices, with the greedy sub-block embedder, guest generators and
//! the bound calculators used to check them.
//!
//! ```
//! use degen_universal::{block_model, embedder, generators, graph};
//!
//! let ov = block_model::Overrides { block_constant: Some(4.0), ..Default::default() };
//! let params = block_model::derive_params(2000, 2, &ov).unwrap();
//! let host = block_model::sample_host(&params, 7).unwrap();
//! let guest = generators::gen_bounded_degree_degenerate(300, 2, 1);
//! let order = graph::degeneracy_order(&guest);
//! let out = embedder::embed(&guest, &order, &host, &Default::default()).unwrap();
//! if let embedder::EmbedOutcome::Success(s) = out {
//!     graph::verify_embedding(&guest, &host.graph, &s.embedding).unwrap();
//! }
//! ```

pub mod analysis;
pub mod block_model;
pub mod embedder;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod graph;

pub use error::{Error, ErrorClass, Result};

/// Version string recorded in experiment manifests.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
