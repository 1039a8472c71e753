//! Preconditioned training for linear unfolded graph neural networks.
//!
//! The model is `Z*(W) = (I + λL̂)⁻¹ X W` over a graph with normalized
//! Laplacian `L̂`. Training minimizes a loss over `Z*`. The crate provides
//! the pieces needed to do that quickly and to check each piece against
//! dense brute force at small scale:
//!
//! * [`graph`]: edge lists, `L̂`, the normalized incidence `B̂`.
//! * [`solver`]: iterative solves with `I + λL̂` under an energy-norm error
//!   contract.
//! * [`sparsifier`]: ridge leverage scores and a regularized spectral
//!   sparsifier of `L̂`.
//! * [`sketch`]: Walsh–Hadamard transform, SRHT, Gaussian sketches and
//!   pencil-eigenvalue certificates.
//! * [`model`]: forward passes, MSE and cross-entropy losses, gradients.
//! * [`baseline`]: plain gradient descent with an inner gradient-descent
//!   solver, the reference trainer.
//! * [`herta`]: the preconditioned trainer.
//! * [`cli`]: the command implementations behind the `herta` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments, clippy::needless_range_loop)]

pub mod baseline;
pub mod bench;
pub mod cli;
pub mod data;
pub mod dense;
pub mod error;
pub mod graph;
pub mod herta;
pub mod model;
pub mod optim;
pub mod oracle;
pub mod rng;
pub mod sketch;
pub mod solver;
pub mod sparse;
pub mod sparsifier;
pub mod trace;

pub use dense::DenseMatrix;
pub use error::{HertaError, Result};
pub use graph::{GraphData, IncidenceMatrix};
pub use rng::RngHandle;
pub use sparse::SparseSymmetric;
