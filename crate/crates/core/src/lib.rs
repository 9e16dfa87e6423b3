//! Monte Carlo simulation and finite-size-scaling analysis of photonic
//! networks built on top of randomly laid optical fibers.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`] places nodes in a disk and samples the fiber (Waxman) and
//!   photonic (pulse survival) layers with counter-based randomness.
//! - [`metrics`] computes exact single-graph observables.
//! - [`ensemble`] aggregates many realizations into order parameter,
//!   susceptibility, Binder cumulant, S2/S1 and cluster statistics.
//! - [`criticality`] locates the critical density and estimates exponents.
//! - [`cli`] drives scenarios from config files and writes CSV/JSON outputs.

pub mod cli;
pub mod criticality;
pub mod ensemble;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod model;

pub use error::{Error, Result};
pub use graph::{Layer, NetworkGraph};
