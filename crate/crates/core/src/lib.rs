//! Geodesic tangent space aggregation PCA.
//!
//! The crate covers the whole embedding pipeline: per-point mean curvature
//! estimates from local quadratic frames ([`curvature`]), curvature- or
//! transport-weighted local covariance and tangent frames, a geodesic
//! alignment operator over the k-nearest-neighbor graph and its spectral
//! embedding ([`gtsa`]). Supporting modules provide the linear algebra,
//! dataset ingestion, discrete optimal transport, PCA baselines and the
//! Ward/ARI/FM/V-measure evaluation used to compare embeddings.

pub mod baselines;
pub mod curvature;
pub mod dataset;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod gtsa;
mod kdtree;
pub mod linalg;
pub mod metrics;
pub mod transport;

pub use error::{Error, Result};
