//! Harmonic analysis on strongly connected directed graphs.
//!
//! The reference operator is the random walk `P = D^{-1} W` together with
//! its stationary distribution `pi`. On top of it the crate provides a
//! directed graph Fourier transform with a frequency ordering
//! (`omega = 1 - Re(theta)`, the Rayleigh quotient of the eigenvector),
//! spectral filters over mono-frequency projectors, redundant wavelet
//! frames with perfect reconstruction, critically sampled diffusion
//! wavelets, and semi-supervised learning / signal modeling solvers.
//!
//! Dense eigendecompositions, SVDs and linear solves go through LAPACK
//! (`ndarray-linalg` with a system OpenBLAS). All randomness flows from
//! explicit seeds, so results are reproducible and independent of the
//! execution order.

pub mod diffusion;
pub mod error;
pub mod filters;
pub mod frame;
pub mod graph;
pub mod laplacian;
pub mod linalg;
pub mod rng;
pub mod spectral;
pub mod ssl;
pub mod walk;

pub use diffusion::{MultiResolution, MultiResolutionMode};
pub use error::{Error, Result};
pub use filters::{FrequencyResponseFilter, PolynomialFilter, SamplingModel};
pub use frame::{FilterBankSpec, FrameOperators};
pub use graph::DirectedGraph;
pub use laplacian::LaplacianKind;
pub use spectral::{FrequencyGroup, SpectralDecomposition};
pub use ssl::{LabelProblem, SslMethod};
pub use walk::{Measure, RandomWalk};
