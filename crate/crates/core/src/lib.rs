//! Bayesian activation mapping for complex-valued fMRI.
//!
//! Each voxel's complex time series follows `y_t = beta * x_t + e_t` with
//! AR(1) complex errors. A spike-and-slab prior selects active voxels, and a
//! sparse spatial probit prior on the inclusion indicators borrows strength
//! from neighbours. The image is split into parcels that are sampled by
//! independent Gibbs chains.

pub mod dataset;
pub mod error;
pub mod fit;
pub mod io;
pub mod metrics;
pub mod parcellation;
pub mod random;
pub mod sampler;
pub mod signal_model;
pub mod simulation;
pub mod study;

pub use dataset::{ComplexDataset, Dims, Field};
pub use error::{Error, Result};
