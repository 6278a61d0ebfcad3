//! Spectral bounds on the independence ratio of finite regular graphs.
//!
//! The library computes the classical Hoffman upper bound together with a
//! family of lower bounds obtained from Gaussian random eigenvectors: strict
//! local maxima of a random eigenvector form an independent set, and on
//! transitive graphs the probability that a fixed vertex is such a maximum is
//! a computable spherical quantity.  Everything is backed by exact
//! small-graph machinery (automorphisms, Jacobi spectra, branch-and-bound
//! maximum independent sets) so the analytic bounds can be certified against
//! ground truth on a corpus of small graphs.

pub mod bounds;
pub mod error;
pub mod graph;
pub mod randev;
pub mod rng;
pub mod spectra;
pub mod sphere;
pub mod symmetry;
pub mod treewave;

pub use error::{Error, Result};
pub use graph::Graph;
