//! Top-level fully dynamic API.
//!
//! In filtered mode the manager runs one [`DynamicStructure`] per threshold
//! `τ = (1+ε)^j`, created lazily the first time an element falls in its
//! band `[(ε/k)·τ, (1+ε)·τ)`, and reports the best solution across copies.
//! In unfiltered mode it runs a single structure with no band.
//!
//! The stream length is not known in advance: capacity starts at 1 and
//! doubles whenever the number of operations seen reaches it. Each doubling
//! rebuilds every copy at the new capacity and re-inserts the alive
//! elements in id order; these replays do not count as stream operations.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::dynamic::{DynamicStructure, ThresholdFilter};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::oracles::{ElementId, OracleCounters, Oracles};
use crate::solution::Member;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operation {
    Insert(ElementId),
    Delete(ElementId),
}

impl Operation {
    pub fn element(&self) -> ElementId {
        match *self {
            Operation::Insert(e) | Operation::Delete(e) => e,
        }
    }

    pub fn is_insert(&self) -> bool {
        matches!(self, Operation::Insert(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Threshold copies with precision `epsilon > 0`.
    Filtered { epsilon: f64 },
    /// A single structure without bands.
    Unfiltered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestSolution {
    /// Threshold exponent `j` of the winning copy; `None` when there are no
    /// copies yet (or in unfiltered mode before the first insertion).
    pub copy: Option<i64>,
    pub members: Vec<Member>,
    pub value: f64,
}

impl BestSolution {
    fn empty() -> Self {
        BestSolution {
            copy: None,
            members: Vec::new(),
            value: 0.0,
        }
    }

    pub fn ids(&self) -> Vec<ElementId> {
        self.members.iter().map(|m| m.id).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub ops: u64,
    /// All calls: singleton evaluations plus every copy, replays included.
    pub total: OracleCounters,
    /// `total / ops`
    pub amortized: f64,
    /// Singleton evaluations made by the manager itself.
    pub routing: OracleCounters,
    pub per_copy: Vec<(i64, OracleCounters)>,
}

#[derive(Debug, Clone)]
pub struct InstanceManager {
    mode: Mode,
    oracles: Oracles,
    rank: usize,
    seed: u64,
    exec: Execution,
    copies: BTreeMap<i64, DynamicStructure>,
    capacity: usize,
    phase: u32,
    ops_seen: u64,
    replayed: u64,
    alive: BTreeSet<ElementId>,
    singletons: HashMap<ElementId, f64>,
}

impl InstanceManager {
    pub fn new(mode: Mode, oracles: &Oracles, seed: u64) -> Result<Self> {
        if let Mode::Filtered { epsilon } = mode {
            if !(epsilon.is_finite() && epsilon > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "epsilon must be positive, got {epsilon}"
                )));
            }
        }
        let mut mgr = InstanceManager {
            mode,
            oracles: oracles.fork(),
            rank: oracles.rank().max(1),
            seed,
            exec: Execution::Sequential,
            copies: BTreeMap::new(),
            capacity: 1,
            phase: 0,
            ops_seen: 0,
            replayed: 0,
            alive: BTreeSet::new(),
            singletons: HashMap::new(),
        };
        if mode == Mode::Unfiltered {
            let ds = mgr.new_copy(0, mgr.oracles.fork())?;
            mgr.copies.insert(0, ds);
        }
        Ok(mgr)
    }

    pub fn filtered(epsilon: f64, oracles: &Oracles, seed: u64) -> Result<Self> {
        Self::new(Mode::Filtered { epsilon }, oracles, seed)
    }

    pub fn unfiltered(oracles: &Oracles, seed: u64) -> Result<Self> {
        Self::new(Mode::Unfiltered, oracles, seed)
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self.copies = std::mem::take(&mut self.copies)
            .into_iter()
            .map(|(j, ds)| (j, ds.with_execution(exec)))
            .collect();
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn ops_seen(&self) -> u64 {
        self.ops_seen
    }

    /// Insertions replayed by capacity doublings.
    pub fn replayed(&self) -> u64 {
        self.replayed
    }

    pub fn alive(&self) -> &BTreeSet<ElementId> {
        &self.alive
    }

    pub fn copies(&self) -> impl Iterator<Item = (i64, &DynamicStructure)> {
        self.copies.iter().map(|(&j, ds)| (j, ds))
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self.mode {
            Mode::Filtered { epsilon } => Some(epsilon),
            Mode::Unfiltered => None,
        }
    }

    fn filter_for(&self, j: i64) -> Option<ThresholdFilter> {
        self.epsilon().map(|epsilon| ThresholdFilter {
            epsilon,
            tau: (1.0 + epsilon).powi(j as i32),
            rank: self.rank,
        })
    }

    fn copy_seed(&self, j: i64) -> u64 {
        splitmix64(self.seed ^ splitmix64(j as u64) ^ splitmix64(0x5eed_0000 + self.phase as u64))
    }

    fn new_copy(&self, j: i64, oracles: Oracles) -> Result<DynamicStructure> {
        Ok(
            DynamicStructure::new(self.capacity, oracles, self.copy_seed(j), self.filter_for(j))?
                .with_execution(self.exec),
        )
    }

    /// Threshold exponents whose band holds an element of singleton value `f`.
    pub fn qualifying_copies(&self, singleton: f64) -> Vec<i64> {
        let Some(epsilon) = self.epsilon() else {
            return vec![0];
        };
        if !(singleton.is_finite() && singleton > 0.0) {
            return Vec::new();
        }
        let ln_base = (1.0 + epsilon).ln();
        let lo = (singleton.ln() / ln_base).floor() as i64 - 2;
        let hi = ((singleton * self.rank as f64 / epsilon).ln() / ln_base).ceil() as i64 + 2;
        (lo..=hi)
            .filter(|&j| self.filter_for(j).is_some_and(|f| f.admits(singleton)))
            .collect()
    }

    /// Upper bound on the number of copies any element can land in:
    /// `⌈log_{1+ε}((1+ε)k/ε)⌉`.
    pub fn copies_per_element_bound(&self) -> usize {
        match self.epsilon() {
            Some(eps) => {
                let b = 1.0 + eps;
                ((b * self.rank as f64 / eps).ln() / b.ln()).ceil() as usize
            }
            None => 1,
        }
    }

    fn singleton(&mut self, e: ElementId) -> Result<f64> {
        if let Some(&v) = self.singletons.get(&e) {
            return Ok(v);
        }
        let v = self.oracles.value(&[e])?;
        self.singletons.insert(e, v);
        Ok(v)
    }

    fn validate(&self, op: Operation) -> Result<()> {
        match op {
            Operation::Insert(e) => {
                self.oracles.check(e)?;
                if self.alive.contains(&e) {
                    return Err(Error::AlreadyAlive(e));
                }
            }
            Operation::Delete(e) => {
                if !self.alive.contains(&e) {
                    return Err(Error::NotAlive(e));
                }
            }
        }
        Ok(())
    }

    /// Applies one stream operation and returns the best solution. A
    /// malformed operation is rejected without touching any state.
    pub fn apply(&mut self, op: Operation) -> Result<BestSolution> {
        self.validate(op)?;
        if self.ops_seen >= self.capacity as u64 {
            self.double()?;
        }
        match op {
            Operation::Insert(e) => {
                self.alive.insert(e);
                self.route_insert(e)?;
            }
            Operation::Delete(e) => {
                self.alive.remove(&e);
                self.route_delete(e)?;
            }
        }
        self.ops_seen += 1;
        self.best_solution()
    }

    fn route_insert(&mut self, e: ElementId) -> Result<()> {
        if self.epsilon().is_none() {
            self.copies.get_mut(&0).expect("unfiltered copy").insert(e)?;
            return Ok(());
        }
        let singleton = self.singleton(e)?;
        let js = self.qualifying_copies(singleton);
        for &j in &js {
            if !self.copies.contains_key(&j) {
                let ds = self.new_copy(j, self.oracles.fork())?;
                self.copies.insert(j, ds);
            }
        }
        let targets: Vec<&mut DynamicStructure> = self
            .copies
            .range_mut(js.first().copied().unwrap_or(0)..=js.last().copied().unwrap_or(-1))
            .map(|(_, ds)| ds)
            .collect();
        self.exec
            .map_mut(targets, |ds| ds.insert_with_singleton(e, singleton).map(|_| ()))
            .into_iter()
            .collect()
    }

    fn route_delete(&mut self, e: ElementId) -> Result<()> {
        let targets: Vec<&mut DynamicStructure> = match self.singletons.get(&e) {
            Some(&singleton) if self.epsilon().is_some() => {
                let js = self.qualifying_copies(singleton);
                self.copies
                    .iter_mut()
                    .filter(|(j, ds)| js.contains(j) && ds.is_alive(e))
                    .map(|(_, ds)| ds)
                    .collect()
            }
            _ => self
                .copies
                .values_mut()
                .filter(|ds| ds.is_alive(e))
                .collect(),
        };
        self.exec
            .map_mut(targets, |ds| ds.delete(e))
            .into_iter()
            .collect()
    }

    fn double(&mut self) -> Result<()> {
        self.capacity *= 2;
        self.phase += 1;
        let alive: Vec<(ElementId, Option<f64>)> = self
            .alive
            .iter()
            .map(|e| (*e, self.singletons.get(e).copied()))
            .collect();
        let mut rebuilt = BTreeMap::new();
        for (&j, old) in &self.copies {
            rebuilt.insert(j, self.new_copy(j, old.oracles().clone())?);
        }
        let targets: Vec<&mut DynamicStructure> = rebuilt.values_mut().collect();
        let replays: Vec<Result<u64>> = self.exec.map_mut(targets, |ds| {
            let mut n = 0;
            for &(e, singleton) in &alive {
                let inserted = match singleton {
                    Some(s) => ds.filter().is_none_or(|f| f.admits(s)) && ds.insert_with_singleton(e, s)?,
                    None => ds.insert(e)?,
                };
                n += inserted as u64;
            }
            Ok(n)
        });
        for r in replays {
            self.replayed += r?;
        }
        self.copies = rebuilt;
        Ok(())
    }

    /// The copy whose current solution has the largest value; ties go to
    /// the smaller threshold exponent.
    pub fn best_solution(&mut self) -> Result<BestSolution> {
        let mut best = BestSolution::empty();
        for (&j, ds) in self.copies.iter_mut() {
            let (sol, value) = ds.current_solution()?;
            if best.copy.is_none() || value > best.value {
                best = BestSolution {
                    copy: Some(j),
                    members: sol.members().to_vec(),
                    value,
                };
            }
        }
        Ok(best)
    }

    /// Oracle calls so far, across the manager and every copy.
    pub fn counters(&self) -> OracleCounters {
        self.oracles.counters() + self.copies.values().map(|ds| ds.oracles().counters()).sum()
    }

    pub fn amortized_cost(&self) -> Result<CostReport> {
        if self.ops_seen == 0 {
            return Err(Error::NoOperations);
        }
        let per_copy: Vec<(i64, OracleCounters)> = self
            .copies
            .iter()
            .map(|(&j, ds)| (j, ds.oracles().counters()))
            .collect();
        let routing = self.oracles.counters();
        let total = routing + per_copy.iter().map(|(_, c)| *c).sum();
        Ok(CostReport {
            ops: self.ops_seen,
            total,
            amortized: total.total() as f64 / self.ops_seen as f64,
            routing,
            per_copy,
        })
    }

    /// Alive elements held by a copy whose band excludes them, and elements
    /// held by more copies than the band width allows.
    pub fn copy_membership_violations(&self) -> Vec<(i64, ElementId)> {
        let mut out = Vec::new();
        let Some(_) = self.epsilon() else {
            return out;
        };
        let mut holders: HashMap<ElementId, usize> = HashMap::new();
        for (&j, ds) in &self.copies {
            let filter = ds.filter().expect("filtered copy");
            for &e in ds.alive() {
                *holders.entry(e).or_default() += 1;
                let ok = self.singletons.get(&e).is_some_and(|&s| filter.admits(s));
                if !ok {
                    out.push((j, e));
                }
            }
        }
        let bound = self.copies_per_element_bound();
        for (e, n) in holders {
            if n > bound {
                out.push((i64::MIN, e));
            }
        }
        out.sort();
        out
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::oracles::{Modular, UniformMatroid};

    fn modular(k: usize, weights: &[(u64, f64)]) -> Oracles {
        let f = Modular::new(weights.iter().map(|&(i, w)| (ElementId(i), w))).unwrap();
        let m = UniformMatroid::new(weights.iter().map(|&(i, _)| ElementId(i)), k);
        Oracles::new(Arc::new(f), Arc::new(m))
    }

    #[test]
    fn doubling_schedule() {
        let o = modular(2, &(1..=9).map(|i| (i, i as f64)).collect::<Vec<_>>());
        let mut mgr = InstanceManager::filtered(0.5, &o, 1).unwrap();
        let mut caps = Vec::new();
        for i in 1..=9 {
            mgr.apply(Operation::Insert(ElementId(i))).unwrap();
            caps.push(mgr.capacity());
            assert!(mgr.capacity() as u64 <= 2 * mgr.ops_seen() + 1);
            assert!(mgr.copies().all(|(_, ds)| ds.capacity() == mgr.capacity()));
        }
        assert_eq!(caps, vec![1, 2, 4, 4, 8, 8, 8, 8, 16]);
    }

    #[test]
    fn band_arithmetic_with_unit_ratio() {
        // ε=1, k=2, f(e)=1: 2^{j+1} > 1 ≥ 2^{j-1}  ⇒  j ∈ {0, 1}
        let o = modular(2, &[(1, 1.0), (2, 1.0)]);
        let mgr = InstanceManager::filtered(1.0, &o, 0).unwrap();
        assert_eq!(mgr.qualifying_copies(1.0), vec![0, 1]);
        assert!(mgr.qualifying_copies(0.0).is_empty());
    }

    #[test]
    fn empty_manager_has_empty_best() {
        let o = modular(1, &[(1, 1.0)]);
        let mut mgr = InstanceManager::filtered(0.25, &o, 0).unwrap();
        assert_eq!(mgr.best_solution().unwrap(), BestSolution::empty());
        assert!(matches!(mgr.amortized_cost(), Err(Error::NoOperations)));
    }

    #[test]
    fn one_insert_under_rank_one_is_cheap() {
        let o = modular(1, &[(1, 4.0)]);
        let mut mgr = InstanceManager::unfiltered(&o, 0).unwrap();
        let best = mgr.apply(Operation::Insert(ElementId(1))).unwrap();
        assert_eq!(best.ids(), vec![ElementId(1)]);
        assert_eq!(best.value, 4.0);
        let cost = mgr.amortized_cost().unwrap();
        // rebuild of the single level: one weight, one independence probe,
        // then one refresh of the solution value
        assert_eq!(cost.total, OracleCounters { value_calls: 2, independence_calls: 1 });
        assert!(cost.amortized <= 10.0);
    }

    #[test]
    fn malformed_ops_leave_state_unchanged() {
        let o = modular(1, &[(1, 4.0), (2, 1.0)]);
        let mut mgr = InstanceManager::filtered(0.5, &o, 0).unwrap();
        mgr.apply(Operation::Insert(ElementId(1))).unwrap();
        let before = (mgr.ops_seen(), mgr.capacity(), mgr.counters());
        assert!(mgr.apply(Operation::Insert(ElementId(1))).is_err());
        assert!(mgr.apply(Operation::Delete(ElementId(2))).is_err());
        assert!(mgr.apply(Operation::Insert(ElementId(7))).is_err());
        assert_eq!(before, (mgr.ops_seen(), mgr.capacity(), mgr.counters()));
    }

    #[test]
    fn singleton_values_are_memoized() {
        let o = modular(1, &[(1, 4.0)]);
        let mut mgr = InstanceManager::filtered(0.5, &o, 0).unwrap();
        mgr.apply(Operation::Insert(ElementId(1))).unwrap();
        mgr.apply(Operation::Delete(ElementId(1))).unwrap();
        mgr.apply(Operation::Insert(ElementId(1))).unwrap();
        assert_eq!(mgr.amortized_cost().unwrap().routing.value_calls, 1);
    }

    #[test]
    fn best_prefers_larger_value() {
        let o = modular(2, &[(1, 1.0), (2, 100.0)]);
        let mut mgr = InstanceManager::filtered(0.5, &o, 3).unwrap();
        mgr.apply(Operation::Insert(ElementId(1))).unwrap();
        let best = mgr.apply(Operation::Insert(ElementId(2))).unwrap();
        assert_eq!(best.value, 100.0);
        assert!(mgr.copy_membership_violations().is_empty());
    }
}
