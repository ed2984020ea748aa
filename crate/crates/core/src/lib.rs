//! Fully dynamic monotone submodular maximization under a matroid
//! constraint.
//!
//! The crate maintains a 4-approximate independent set while elements are
//! inserted and deleted, with amortized cost measured in value-oracle and
//! independence-oracle calls. See [`manager::InstanceManager`] for the
//! top-level API and [`dynamic::DynamicStructure`] for the leveled structure
//! it is built on.

pub mod baselines;
pub mod dynamic;
pub mod error;
pub mod exec;
pub mod harness;
pub mod manager;
pub mod oracles;
pub mod solution;
pub mod swapping;

pub use error::{Error, Result};
pub use exec::Execution;
pub use manager::{BestSolution, InstanceManager, Mode, Operation};
pub use oracles::{ElementId, OracleCounters, Oracles};
