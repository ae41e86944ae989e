//! Stationary autoregressive models with finite-sample generalization bounds.
//!
//! The crate fits AR(p) models by least squares under a stationarity
//! constraint, bounds their out-of-sample truncated squared-error risk using
//! the Gaussian complexity of the Schur stability polytope together with
//! β-mixing block decompositions, and selects the model order by structural
//! risk minimization.
//!
//! Everything here is pure computation over `alloc` containers; file formats,
//! CSV ingestion and the command-line front end live in the `arbound` crate.
//! Enable the `parallel` feature to spread Monte Carlo chunks and per-order
//! work over a rayon pool; results are identical for any worker count.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "parallel")]
extern crate std;

pub mod armodel;
pub mod complexity;
mod error;
pub mod mixing;
mod par;
pub mod quadrature;
pub mod riskbound;
pub mod simgen;
pub mod stability;
pub mod stats;
pub mod timeseries;

pub use error::{Error, Result};
