//! Value and independence oracles with call accounting.
//!
//! Every algorithm in this crate reaches the submodular function and the
//! matroid only through an [`Oracles`] handle, which counts each query.
//! Running time is measured in these counts, not in machine operations.
//!
//! The universe is append-only: oracles answer queries about any element
//! they were built with, including elements that have since been deleted
//! from a stream. History sets legitimately keep such elements around.

mod functions;
mod matroids;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use functions::{FacilityLocation, Modular, WeightedCoverage};
pub use matroids::{GraphicMatroid, PartitionMatroid, UniformMatroid};

/// Identifier of a ground-set element. Unique within a universe.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ElementId(pub u64);

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for ElementId {
    fn from(id: u64) -> Self {
        ElementId(id)
    }
}

/// A normalized monotone submodular set function over a fixed universe.
///
/// Sets are passed as duplicate-free slices; order carries no meaning.
pub trait SubmodularFunction: Send + Sync + fmt::Debug {
    fn contains(&self, e: ElementId) -> bool;

    fn evaluate(&self, set: &[ElementId]) -> Result<f64>;

    /// `f(set + e) - f(set)`. `base` is a known value of `f(set)`; the default
    /// implementation evaluates it when absent. Implementations may compute
    /// the gain directly when that is exact and cheaper.
    fn marginal(&self, e: ElementId, set: &[ElementId], base: Option<f64>) -> Result<f64> {
        if set.contains(&e) {
            self.check(e)?;
            return Ok(0.0);
        }
        let base = match base {
            Some(v) => v,
            None => self.evaluate(set)?,
        };
        let mut extended = Vec::with_capacity(set.len() + 1);
        extended.extend_from_slice(set);
        extended.push(e);
        Ok((self.evaluate(&extended)? - base).max(0.0))
    }

    fn check(&self, e: ElementId) -> Result<()> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(crate::Error::UnknownElement(e))
        }
    }
}

/// An independence oracle for a matroid over a fixed universe.
pub trait Matroid: Send + Sync + fmt::Debug {
    fn contains(&self, e: ElementId) -> bool;

    fn is_independent(&self, set: &[ElementId]) -> Result<bool>;

    /// Size of every basis of the matroid restricted to the universe.
    fn rank(&self) -> usize;
}

/// Snapshot of the oracle-call totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OracleCounters {
    pub value_calls: u64,
    pub independence_calls: u64,
}

impl OracleCounters {
    pub fn total(&self) -> u64 {
        self.value_calls + self.independence_calls
    }

    pub fn delta_since(&self, earlier: OracleCounters) -> OracleCounters {
        OracleCounters {
            value_calls: self.value_calls - earlier.value_calls,
            independence_calls: self.independence_calls - earlier.independence_calls,
        }
    }
}

impl std::ops::Add for OracleCounters {
    type Output = OracleCounters;

    fn add(self, rhs: OracleCounters) -> OracleCounters {
        OracleCounters {
            value_calls: self.value_calls + rhs.value_calls,
            independence_calls: self.independence_calls + rhs.independence_calls,
        }
    }
}

impl std::ops::AddAssign for OracleCounters {
    fn add_assign(&mut self, rhs: OracleCounters) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for OracleCounters {
    fn sum<I: Iterator<Item = OracleCounters>>(iter: I) -> Self {
        iter.fold(OracleCounters::default(), |a, b| a + b)
    }
}

#[derive(Debug, Default)]
struct Counters {
    value: AtomicU64,
    independence: AtomicU64,
}

/// Counted access to a value oracle and an independence oracle.
///
/// Cloning shares the counters; [`Oracles::fork`] shares the functions but
/// starts fresh counters, which is how each algorithm instance gets its own
/// accounting.
#[derive(Debug, Clone)]
pub struct Oracles {
    function: Arc<dyn SubmodularFunction>,
    matroid: Arc<dyn Matroid>,
    counters: Arc<Counters>,
}

impl Oracles {
    pub fn new(function: Arc<dyn SubmodularFunction>, matroid: Arc<dyn Matroid>) -> Self {
        Oracles {
            function,
            matroid,
            counters: Arc::default(),
        }
    }

    pub fn fork(&self) -> Self {
        Oracles::new(self.function.clone(), self.matroid.clone())
    }

    /// `f(set)`. One value call.
    pub fn value(&self, set: &[ElementId]) -> Result<f64> {
        self.counters.value.fetch_add(1, Ordering::Relaxed);
        self.function.evaluate(set)
    }

    /// `f(e | set)`. Two value calls.
    pub fn marginal(&self, e: ElementId, set: &[ElementId]) -> Result<f64> {
        self.counters.value.fetch_add(2, Ordering::Relaxed);
        self.function.marginal(e, set, None)
    }

    /// `f(e | set)` when the caller already holds `f(set)`. One value call.
    pub fn marginal_given(&self, e: ElementId, set: &[ElementId], f_set: f64) -> Result<f64> {
        self.counters.value.fetch_add(1, Ordering::Relaxed);
        self.function.marginal(e, set, Some(f_set))
    }

    /// Membership of `set` in the matroid. One independence call.
    pub fn is_independent(&self, set: &[ElementId]) -> Result<bool> {
        self.counters.independence.fetch_add(1, Ordering::Relaxed);
        self.matroid.is_independent(set)
    }

    pub fn rank(&self) -> usize {
        self.matroid.rank()
    }

    pub fn contains(&self, e: ElementId) -> bool {
        self.function.contains(e) && self.matroid.contains(e)
    }

    pub fn check(&self, e: ElementId) -> Result<()> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(crate::Error::UnknownElement(e))
        }
    }

    /// Uncounted access, for audits and assertions that must not perturb
    /// the accounting.
    pub fn function(&self) -> &dyn SubmodularFunction {
        self.function.as_ref()
    }

    /// Uncounted access to the matroid.
    pub fn matroid(&self) -> &dyn Matroid {
        self.matroid.as_ref()
    }

    pub fn counters(&self) -> OracleCounters {
        OracleCounters {
            value_calls: self.counters.value.load(Ordering::Relaxed),
            independence_calls: self.counters.independence.load(Ordering::Relaxed),
        }
    }

    pub fn reset_counters(&self) {
        self.counters.value.store(0, Ordering::Relaxed);
        self.counters.independence.store(0, Ordering::Relaxed);
    }
}
