//! The leveled fully dynamic structure.
//!
//! Levels `0..=L` (`L = log₂ n`) each hold a partial solution `S_ℓ` with its
//! history `S′_ℓ`, a candidate set `A_ℓ` and a buffer `B_ℓ`. Level `ℓ` has
//! capacity `n / 2^ℓ`: a buffer reaching capacity, or the deletion of a
//! member of `S_ℓ`, rebuilds level `ℓ` and every level above it. The
//! current solution is `S_L`.
//!
//! A rebuild of level `ℓ` starts from copies of level `ℓ − 1` and then
//! repeatedly (1) weighs every candidate against `S′_ℓ` and finds its swap
//! partner, (2) discards candidates that swapping would discard, and
//! (3) while at least `n / 2^ℓ` candidates survive, admits one chosen
//! uniformly at random. Survivors move on to the next level.
//!
//! Level 0 has no level below it. Its rebuild starts from an empty solution
//! and takes every element currently alive in the structure as candidates.

use indexmap::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::oracles::{ElementId, Oracles};
use crate::solution::{SwapCandidate, WeightedSolution};

/// Band filter of a threshold copy with `τ = (1+ε)^j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdFilter {
    pub epsilon: f64,
    pub tau: f64,
    pub rank: usize,
}

impl ThresholdFilter {
    /// `(ε/k)·τ`
    pub fn lower(&self) -> f64 {
        self.epsilon / self.rank.max(1) as f64 * self.tau
    }

    /// `(1+ε)·τ`
    pub fn upper(&self) -> f64 {
        (1.0 + self.epsilon) * self.tau
    }

    /// Whether an element with singleton value `f(e)` belongs to this copy.
    pub fn admits(&self, singleton: f64) -> bool {
        singleton < self.upper() && singleton >= self.lower()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    /// Admitted without a swap.
    Added,
    /// Admitted in exchange for the given member.
    Swapped(ElementId),
    /// Discarded by the swap test.
    Filtered,
    /// Discarded by the marginal filter of a threshold copy.
    BelowThreshold,
}

/// One decision of the most recent rebuild of a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub level: usize,
    pub element: ElementId,
    pub kind: TraceKind,
}

#[derive(Debug, Clone, Default)]
pub struct Level {
    solution: WeightedSolution,
    candidates: IndexSet<ElementId>,
    buffer: IndexSet<ElementId>,
    trace: Vec<TraceEvent>,
}

impl Level {
    pub fn solution(&self) -> &WeightedSolution {
        &self.solution
    }

    pub fn candidates(&self) -> &IndexSet<ElementId> {
        &self.candidates
    }

    pub fn buffer(&self) -> &IndexSet<ElementId> {
        &self.buffer
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    BufferOverCapacity { len: usize, bound: usize },
    CandidatesOverBound { len: usize, bound: usize },
    /// `|A_ℓ| ≥ n/2^ℓ` right after a rebuild of the level.
    CandidatesAfterRebuild { len: usize, bound: usize },
    /// `B_ℓ ≠ ∅` right after a rebuild of the level.
    BufferAfterRebuild { len: usize },
    DependentSolution,
    SolutionOverRank { len: usize, rank: usize },
    MissingFromHistory(ElementId),
    Unsorted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub level: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InvariantReport {
    pub violations: Vec<Violation>,
}

impl InvariantReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Evaluation {
    weight: f64,
    swap: SwapCandidate,
    above_threshold: bool,
}

#[derive(Debug, Clone)]
pub struct DynamicStructure {
    capacity: usize,
    levels: Vec<Level>,
    rng: ChaCha8Rng,
    filter: Option<ThresholdFilter>,
    oracles: Oracles,
    exec: Execution,
    /// Elements held by the structure, in insertion order.
    alive: IndexSet<ElementId>,
    /// Inserted but outside the filter band.
    ignored: IndexSet<ElementId>,
    cached_value: Option<f64>,
    rebuild_violations: Vec<Violation>,
    rebuilds: Vec<u64>,
}

impl DynamicStructure {
    pub fn new(
        capacity: usize,
        oracles: Oracles,
        seed: u64,
        filter: Option<ThresholdFilter>,
    ) -> Result<Self> {
        if capacity == 0 || !capacity.is_power_of_two() {
            return Err(Error::CapacityNotPowerOfTwo(capacity));
        }
        let depth = capacity.trailing_zeros() as usize;
        Ok(DynamicStructure {
            capacity,
            levels: vec![Level::default(); depth + 1],
            rng: ChaCha8Rng::seed_from_u64(seed),
            filter,
            oracles,
            exec: Execution::Sequential,
            alive: IndexSet::new(),
            ignored: IndexSet::new(),
            cached_value: Some(0.0),
            rebuild_violations: Vec::new(),
            rebuilds: vec![0; depth + 1],
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// `L = log₂ n`.
    pub fn top_level(&self) -> usize {
        self.levels.len() - 1
    }

    fn level_capacity(&self, level: usize) -> usize {
        self.capacity >> level
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn filter(&self) -> Option<&ThresholdFilter> {
        self.filter.as_ref()
    }

    pub fn oracles(&self) -> &Oracles {
        &self.oracles
    }

    pub fn alive(&self) -> &IndexSet<ElementId> {
        &self.alive
    }

    pub fn is_alive(&self, id: ElementId) -> bool {
        self.alive.contains(&id) || self.ignored.contains(&id)
    }

    /// Number of rebuilds per level so far.
    pub fn rebuild_counts(&self) -> &[u64] {
        &self.rebuilds
    }

    /// Inserts `e`. With a filter, one value call decides whether the
    /// element falls in the band; returns `false` when it was ignored.
    pub fn insert(&mut self, e: ElementId) -> Result<bool> {
        self.check_insertable(e)?;
        match self.filter {
            Some(_) => {
                let singleton = self.oracles.value(&[e])?;
                self.insert_with_singleton(e, singleton)
            }
            None => {
                self.buffer(e)?;
                Ok(true)
            }
        }
    }

    /// Inserts `e` when its singleton value is already known, so the band
    /// check costs no oracle call.
    pub fn insert_with_singleton(&mut self, e: ElementId, singleton: f64) -> Result<bool> {
        self.check_insertable(e)?;
        if let Some(filter) = self.filter {
            if !filter.admits(singleton) {
                self.ignored.insert(e);
                return Ok(false);
            }
        }
        self.buffer(e)?;
        Ok(true)
    }

    fn check_insertable(&self, e: ElementId) -> Result<()> {
        self.oracles.check(e)?;
        if self.is_alive(e) {
            return Err(Error::AlreadyAlive(e));
        }
        Ok(())
    }

    fn buffer(&mut self, e: ElementId) -> Result<()> {
        self.alive.insert(e);
        for level in &mut self.levels {
            level.buffer.insert(e);
        }
        let full = (0..self.levels.len())
            .find(|&l| self.levels[l].buffer.len() >= self.level_capacity(l));
        if let Some(l) = full {
            self.level_construct(l)?;
        }
        Ok(())
    }

    /// Deletes `id`. Rebuilds from the lowest level whose solution holds it;
    /// history sets keep it.
    pub fn delete(&mut self, id: ElementId) -> Result<()> {
        if self.ignored.shift_remove(&id) {
            return Ok(());
        }
        if !self.alive.shift_remove(&id) {
            return Err(Error::NotAlive(id));
        }
        for level in &mut self.levels {
            level.candidates.shift_remove(&id);
            level.buffer.shift_remove(&id);
        }
        if let Some(l) = self.levels.iter().position(|lv| lv.solution.contains(id)) {
            self.level_construct(l)?;
        }
        Ok(())
    }

    /// Rebuilds `level` and every level above it.
    pub fn level_construct(&mut self, level: usize) -> Result<()> {
        if level > self.top_level() {
            return Err(Error::LevelOutOfRange {
                level,
                max: self.top_level(),
            });
        }
        for l in level..=self.top_level() {
            self.rebuild_one(l)?;
        }
        Ok(())
    }

    fn rebuild_one(&mut self, l: usize) -> Result<()> {
        let (mut candidates, mut solution) = if l == 0 {
            (self.alive.clone(), WeightedSolution::new())
        } else {
            let below = &self.levels[l - 1];
            let mut a = below.candidates.clone();
            a.extend(below.buffer.iter().copied());
            (a, below.solution.clone())
        };
        let cap = self.level_capacity(l);
        let mut trace = Vec::new();
        loop {
            let evaluations = self.evaluate(&candidates, &solution)?;
            let mut kept = IndexSet::with_capacity(candidates.len());
            let mut kept_evals = Vec::with_capacity(candidates.len());
            for (e, ev) in candidates.iter().copied().zip(evaluations) {
                if !ev.above_threshold {
                    trace.push(TraceEvent { level: l, element: e, kind: TraceKind::BelowThreshold });
                    continue;
                }
                let survives = match ev.swap {
                    SwapCandidate::Free => true,
                    SwapCandidate::Swap(y) => ev.weight > 2.0 * y.weight,
                    SwapCandidate::Blocked => false,
                };
                if survives {
                    kept.insert(e);
                    kept_evals.push(ev);
                } else {
                    trace.push(TraceEvent { level: l, element: e, kind: TraceKind::Filtered });
                }
            }
            candidates = kept;
            if candidates.len() >= cap {
                let i = self.rng.gen_range(0..candidates.len());
                let e = candidates.shift_remove_index(i).expect("index in range");
                let ev = &kept_evals[i];
                let kind = match ev.swap {
                    SwapCandidate::Swap(y) => {
                        debug_assert!(ev.weight > 2.0 * y.weight);
                        solution.admit(e, ev.weight, Some(y.id))?;
                        TraceKind::Swapped(y.id)
                    }
                    _ => {
                        solution.admit(e, ev.weight, None)?;
                        TraceKind::Added
                    }
                };
                debug_assert!(self
                    .oracles
                    .matroid()
                    .is_independent(&solution.ids())
                    .unwrap_or(false));
                trace.push(TraceEvent { level: l, element: e, kind });
            }
            if candidates.len() < cap {
                break;
            }
        }

        if l == self.top_level() {
            let previous = &self.levels[l].solution;
            if previous.members() != solution.members() {
                self.cached_value = None;
            }
        }
        let level = &mut self.levels[l];
        level.solution = solution;
        level.candidates = candidates;
        level.buffer.clear();
        level.trace = trace;
        self.rebuilds[l] += 1;
        if self.levels[l].candidates.len() >= cap {
            self.rebuild_violations.push(Violation {
                level: l,
                kind: ViolationKind::CandidatesAfterRebuild {
                    len: self.levels[l].candidates.len(),
                    bound: cap,
                },
            });
        }
        Ok(())
    }

    /// Weight, swap partner and marginal-filter outcome for every candidate.
    ///
    /// One value call per candidate: `f(S′)` is carried as the sum of frozen
    /// weights. With a filter, `f(e | S) ≥ f(e | S′)` because `S ⊆ S′`, so
    /// only candidates whose weight is under the band's lower end need the
    /// extra check (one call each, plus one for `f(S)`). Swap partners are
    /// searched only for candidates that pass the filter.
    fn evaluate(
        &self,
        candidates: &IndexSet<ElementId>,
        solution: &WeightedSolution,
    ) -> Result<Vec<Evaluation>> {
        let oracles = &self.oracles;
        let history = solution.history_ids();
        let f_history = solution.history_weight();
        let candidates: Vec<ElementId> = candidates.iter().copied().collect();
        let weights = self
            .exec
            .map(&candidates, |&e| oracles.marginal_given(e, history, f_history))
            .into_iter()
            .collect::<Result<Vec<f64>>>()?;

        let mut above = vec![true; candidates.len()];
        if let Some(flt) = self.filter {
            let lower = flt.lower();
            let light: Vec<usize> = (0..candidates.len()).filter(|&i| weights[i] < lower).collect();
            if !light.is_empty() {
                let members = solution.ids();
                let f_members = oracles.value(&members)?;
                let gains = self
                    .exec
                    .map(&light, |&i| oracles.marginal_given(candidates[i], &members, f_members));
                for (&i, gain) in light.iter().zip(gains) {
                    above[i] = gain? >= lower;
                }
            }
        }

        let indices: Vec<usize> = (0..candidates.len()).collect();
        self.exec
            .map(&indices, |&i| {
                let swap = if above[i] {
                    solution.find_swap_binary(candidates[i], oracles)?
                } else {
                    SwapCandidate::Blocked
                };
                Ok(Evaluation {
                    weight: weights[i],
                    swap,
                    above_threshold: above[i],
                })
            })
            .into_iter()
            .collect()
    }

    /// `S_L` and its value. Costs one value call only when `S_L` changed
    /// since the previous query.
    pub fn current_solution(&mut self) -> Result<(&WeightedSolution, f64)> {
        let value = match self.cached_value {
            Some(v) => v,
            None => {
                let ids = self.levels[self.top_level()].solution.ids();
                let v = self.oracles.value(&ids)?;
                self.cached_value = Some(v);
                v
            }
        };
        Ok((&self.levels[self.top_level()].solution, value))
    }

    /// The cached value of `S_L`, if fresh.
    pub fn cached_value(&self) -> Option<f64> {
        self.cached_value
    }

    pub fn solution(&self) -> &WeightedSolution {
        &self.levels[self.top_level()].solution
    }

    /// Decisions of the latest rebuild of every level, from level 0 up.
    /// Replaying these elements through plain swapping reproduces `S_L`.
    pub fn decision_trace(&self) -> Vec<TraceEvent> {
        self.levels.iter().flat_map(|l| l.trace.iter().copied()).collect()
    }

    /// Checks every level invariant. Uses the matroid without counting.
    pub fn audit_invariants(&self) -> InvariantReport {
        let mut violations = self.rebuild_violations.clone();
        let rank = self.oracles.rank();
        for (l, level) in self.levels.iter().enumerate() {
            let cap = self.level_capacity(l);
            let mut flag = |kind| violations.push(Violation { level: l, kind });
            if level.buffer.len() > cap {
                flag(ViolationKind::BufferOverCapacity {
                    len: level.buffer.len(),
                    bound: cap,
                });
            }
            if level.candidates.len() > 4 * cap {
                flag(ViolationKind::CandidatesOverBound {
                    len: level.candidates.len(),
                    bound: 4 * cap,
                });
            }
            let sol = &level.solution;
            if !self.oracles.matroid().is_independent(&sol.ids()).unwrap_or(false) {
                flag(ViolationKind::DependentSolution);
            }
            if sol.len() > rank {
                flag(ViolationKind::SolutionOverRank { len: sol.len(), rank });
            }
            if let Some(m) = sol.members().iter().find(|m| !sol.history().contains(&m.id)) {
                flag(ViolationKind::MissingFromHistory(m.id));
            }
            if sol
                .members()
                .windows(2)
                .any(|w| w[0].order(&w[1]) != std::cmp::Ordering::Less)
            {
                flag(ViolationKind::Unsorted);
            }
        }
        InvariantReport { violations }
    }

    /// Whether every buffer is empty and every candidate set is below its
    /// capacity, as holds right after a rebuild of level 0.
    pub fn is_settled(&self) -> bool {
        self.levels.iter().enumerate().all(|(l, lv)| {
            lv.buffer.is_empty() && lv.candidates.len() < self.level_capacity(l)
        })
    }
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
    fn init_shapes_levels() {
        let o = modular(1, &[(1, 1.0)]);
        let ds = DynamicStructure::new(8, o.clone(), 0, None).unwrap();
        assert_eq!(ds.top_level(), 3);
        assert_eq!(ds.levels().len(), 4);
        assert!(ds.levels().iter().all(|l| l.solution().is_empty()
            && l.solution().history().is_empty()
            && l.candidates().is_empty()
            && l.buffer().is_empty()));
        let one = DynamicStructure::new(1, o.clone(), 0, None).unwrap();
        assert_eq!(one.top_level(), 0);
        assert_eq!(o.counters().total(), 0);
    }

    #[test]
    fn capacity_must_be_power_of_two() {
        let o = modular(1, &[(1, 1.0)]);
        assert!(matches!(
            DynamicStructure::new(6, o.clone(), 0, None),
            Err(Error::CapacityNotPowerOfTwo(6))
        ));
        assert!(DynamicStructure::new(0, o, 0, None).is_err());
    }

    #[test]
    fn first_insert_rebuilds_top_level() {
        let o = modular(1, &[(1, 5.0)]);
        let mut ds = DynamicStructure::new(8, o, 0, None).unwrap();
        ds.insert(ElementId(1)).unwrap();
        assert_eq!(ds.rebuild_counts(), &[0, 0, 0, 1]);
        for l in 0..3 {
            assert_eq!(ds.levels()[l].buffer().len(), 1);
        }
        let (sol, value) = ds.current_solution().unwrap();
        assert_eq!(sol.ids(), vec![ElementId(1)]);
        assert_eq!(value, 5.0);
    }

    #[test]
    fn fresh_structure_has_empty_solution() {
        let o = modular(1, &[(1, 5.0)]);
        let mut ds = DynamicStructure::new(4, o.clone(), 0, None).unwrap();
        let (sol, value) = ds.current_solution().unwrap();
        assert!(sol.is_empty());
        assert_eq!(value, 0.0);
        assert_eq!(o.counters().total(), 0);
    }

    #[test]
    fn filter_ignores_out_of_band_element() {
        // ε=0.5, τ=10, k=2: band [2.5, 15)
        let o = modular(2, &[(1, 20.0), (2, 3.0)]);
        let filter = ThresholdFilter { epsilon: 0.5, tau: 10.0, rank: 2 };
        let mut ds = DynamicStructure::new(4, o, 0, Some(filter)).unwrap();
        assert!(!ds.insert(ElementId(1)).unwrap());
        assert!(ds.levels().iter().all(|l| l.buffer().is_empty()));
        assert!(ds.insert(ElementId(2)).unwrap());
        // deleting an ignored element is a no-op
        ds.delete(ElementId(1)).unwrap();
        assert!(ds.delete(ElementId(1)).is_err());
    }

    #[test]
    fn deleting_buffered_element_costs_nothing() {
        let o = modular(1, &[(1, 5.0), (2, 1.0)]);
        // whether the light element lands in some S_ℓ depends on the pops
        let mut ds = (0..64)
            .map(|seed| {
                let mut ds = DynamicStructure::new(8, o.clone(), seed, None).unwrap();
                ds.insert(ElementId(1)).unwrap();
                ds.insert(ElementId(2)).unwrap();
                ds
            })
            .find(|ds| !ds.levels().iter().any(|l| l.solution().contains(ElementId(2))))
            .expect("some seed keeps element 2 out of every solution");
        assert!(ds.levels()[0].buffer().contains(&ElementId(2)));
        let before = o.counters();
        let rebuilds = ds.rebuild_counts().to_vec();
        ds.delete(ElementId(2)).unwrap();
        assert_eq!(o.counters(), before);
        assert_eq!(ds.rebuild_counts(), &rebuilds[..]);
        assert!(ds.levels().iter().all(|l| !l.buffer().contains(&ElementId(2))));
    }

    #[test]
    fn deleting_solution_element_rebuilds_from_survivors() {
        let o = modular(1, &[(1, 1.0), (2, 5.0), (3, 2.0)]);
        let mut ds = DynamicStructure::new(4, o, 7, None).unwrap();
        for i in 1..=3 {
            ds.insert(ElementId(i)).unwrap();
        }
        let top = ds.solution().ids();
        assert_eq!(top, vec![ElementId(2)]);
        ds.delete(ElementId(2)).unwrap();
        let (sol, v) = ds.current_solution().unwrap();
        assert_eq!(sol.len(), 1);
        // OPT over {1, 3} is 2; a 4-approximation needs at least 0.5
        assert!(4.0 * v >= 2.0);
    }

    #[test]
    fn duplicate_and_unknown_inserts_fail() {
        let o = modular(1, &[(1, 1.0)]);
        let mut ds = DynamicStructure::new(2, o, 0, None).unwrap();
        ds.insert(ElementId(1)).unwrap();
        assert!(matches!(ds.insert(ElementId(1)), Err(Error::AlreadyAlive(_))));
        assert!(matches!(ds.insert(ElementId(9)), Err(Error::UnknownElement(_))));
        assert!(matches!(ds.delete(ElementId(9)), Err(Error::NotAlive(_))));
    }

    #[test]
    fn empty_rebuild_recurses_without_sampling() {
        let o = modular(1, &[(1, 1.0)]);
        let mut ds = DynamicStructure::new(4, o.clone(), 0, None).unwrap();
        ds.level_construct(1).unwrap();
        assert_eq!(ds.rebuild_counts(), &[0, 1, 1]);
        // no candidates, so no oracle calls at all
        assert_eq!(o.counters().value_calls, 0);
        assert_eq!(o.counters().independence_calls, 0);
        assert!(ds.level_construct(3).is_err());
    }

    #[test]
    fn audit_flags_oversized_buffer() {
        let o = modular(1, &[(1, 1.0), (2, 1.0), (3, 1.0)]);
        let mut ds = DynamicStructure::new(4, o, 0, None).unwrap();
        assert!(ds.audit_invariants().is_clean());
        // capacity of the top level is 1
        ds.levels[2].buffer.extend([ElementId(1), ElementId(2)]);
        let report = ds.audit_invariants();
        assert_eq!(
            report.violations,
            vec![Violation {
                level: 2,
                kind: ViolationKind::BufferOverCapacity { len: 2, bound: 1 }
            }]
        );
    }
}
