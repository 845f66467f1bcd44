//! Label-efficient linear regression and row-sampling dimension reduction.
//!
//! The crate computes Lewis weights and M-estimator sensitivities, builds
//! row-sampling subspace embeddings for ℓp, Huber, Tukey and Orlicz losses,
//! and solves regression problems while reading few entries of the target
//! vector. Every read of the target goes through a [`TargetOracle`], which
//! counts distinct indices.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod diagnostics;
pub mod error;
pub mod huber;
pub mod kron;
pub mod lewis;
pub mod linalg;
pub mod loss;
pub mod lp_active;
pub mod m_active;
pub mod matrix;
pub mod oracle;
pub mod orlicz;
pub mod rng;
pub mod sensitivity;
pub mod solvers;
pub mod weights;

pub use error::{Error, Result};
pub use loss::{loss_catalog, LossDescriptor, LossKind};
pub use matrix::DenseMatrix;
pub use oracle::{Labels, TargetOracle, TargetSource};
pub use rng::RngStream;
pub use weights::{mnorm, WeightVector};
