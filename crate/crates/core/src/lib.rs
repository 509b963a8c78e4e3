//! Two-sample testing of networks through hyperbolic embeddings.
//!
//! Graphs are embedded into the Poincaré half-plane by cosh-MDS, node
//! densities are estimated with heat-kernel smoothing in the Helgason-Fourier
//! domain, and a pooled-model bootstrap turns the L2 distance between two
//! estimates into a p-value.

pub mod cli;
pub mod embed;
pub mod graphcore;
pub mod graphgen;
pub mod hgeom;
pub mod hkde;
pub mod nettest;
pub mod rng;

pub use embed::{cosh_mds, EmbeddedCloud, EmbeddingError};
pub use graphcore::{Graph, GraphError};
pub use graphgen::{GeneratorSpec, LinkRule};
pub use hgeom::HPoint;
pub use hkde::DensityEstimate;
pub use nettest::{compare, power_simulation, ComparisonConfig, TestResult};
pub use rng::RngSeed;
