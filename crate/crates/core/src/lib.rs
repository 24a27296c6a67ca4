//! Random-walk absorption times to a seed vertex and the Dirichlet-Fiedler
//! vectors that approximate them.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] holds the undirected graph type, the edge-list format and the
//!   three experiment graphs (caveman, G(n,p), Zachary's karate club).
//! * [`markov`] builds the simple random walk, the absorbing chain for a seed
//!   and solves for exact absorption times. It also carries a Monte-Carlo
//!   simulator that serves as an independent check.
//! * [`spectral`] computes Laplacians, dense symmetric eigensystems, global
//!   Fiedler vectors and the exact Dirichlet-Fiedler vector of a seed.
//! * [`approx`] holds spectral approximations of absorption times (truncated
//!   series and the rank-1 closed form) and comparison metrics.
//! * [`descent`] estimates the Dirichlet-Fiedler vector locally by gradient
//!   descent on a soft-constrained quadratic objective.
//! * [`classify`] turns score vectors into bipartitions and evaluates cuts.
//! * [`report`] writes the CSV and JSON outputs shared with the CLI.

pub mod approx;
pub mod classify;
pub mod descent;
mod error;
pub mod graph;
pub mod markov;
pub mod report;
pub mod spectral;

pub use approx::{CompareReport, Rank1Estimate, SeriesEstimate};
pub use classify::{Classifier, CutResult, Method};
pub use descent::{DescentParams, FiedlerEstimate};
pub use error::{Error, Result};
pub use graph::{Graph, GroundTruth};
pub use markov::{AbsorbingChain, AbsorptionVector, TransitionMatrix};
pub use spectral::{DirichletFiedler, MatrixTag, SpectralPair};
