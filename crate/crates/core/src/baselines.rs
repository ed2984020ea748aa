//! Straw-man dynamic algorithms, greedy solvers and the brute-force optimum.
//!
//! [`DynamicSwapping`] and [`DynamicGreedy`] recompute from scratch whenever
//! the current solution loses an element (greedy also on every insertion),
//! so a stream that keeps deleting the best element costs them `Ω(n)` per
//! operation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::manager::{InstanceManager, Operation};
use crate::oracles::{ElementId, OracleCounters, Oracles};
use crate::swapping::SwapState;

/// Common driver interface for everything the harness can replay.
pub trait DynamicAlgorithm {
    fn name(&self) -> &'static str;

    fn apply(&mut self, op: Operation) -> Result<()>;

    /// Current solution and its value.
    fn solution(&mut self) -> Result<(Vec<ElementId>, f64)>;

    /// Oracle calls made so far.
    fn counters(&self) -> OracleCounters;
}

impl DynamicAlgorithm for InstanceManager {
    fn name(&self) -> &'static str {
        match self.mode() {
            crate::manager::Mode::Filtered { .. } => "dynamic",
            crate::manager::Mode::Unfiltered => "dynamic-unfiltered",
        }
    }

    fn apply(&mut self, op: Operation) -> Result<()> {
        InstanceManager::apply(self, op).map(|_| ())
    }

    fn solution(&mut self) -> Result<(Vec<ElementId>, f64)> {
        let best = self.best_solution()?;
        Ok((best.ids(), best.value))
    }

    fn counters(&self) -> OracleCounters {
        InstanceManager::counters(self)
    }
}

/// Tracks the alive set in insertion order and rejects malformed ops.
#[derive(Debug, Clone, Default)]
struct AliveSet {
    order: IndexSet<ElementId>,
}

impl AliveSet {
    fn apply(&mut self, op: Operation, oracles: &Oracles) -> Result<()> {
        match op {
            Operation::Insert(e) => {
                oracles.check(e)?;
                if !self.order.insert(e) {
                    return Err(Error::AlreadyAlive(e));
                }
            }
            Operation::Delete(e) => {
                if !self.order.shift_remove(&e) {
                    return Err(Error::NotAlive(e));
                }
            }
        }
        Ok(())
    }
}

/// Plain swapping over an insertion-only stream.
#[derive(Debug, Clone)]
pub struct StreamingSwapping {
    state: SwapState,
    alive: AliveSet,
    value: Option<f64>,
    ops: usize,
}

impl StreamingSwapping {
    pub fn new(oracles: &Oracles) -> Self {
        StreamingSwapping {
            state: SwapState::new(oracles.fork()),
            alive: AliveSet::default(),
            value: None,
            ops: 0,
        }
    }
}

impl DynamicAlgorithm for StreamingSwapping {
    fn name(&self) -> &'static str {
        "swapping"
    }

    fn apply(&mut self, op: Operation) -> Result<()> {
        if !op.is_insert() {
            return Err(Error::Unsupported {
                algorithm: "swapping",
                index: self.ops,
            });
        }
        self.alive.apply(op, self.state.oracles())?;
        self.ops += 1;
        if self.state.process(op.element())?.admitted() {
            self.value = None;
        }
        Ok(())
    }

    fn solution(&mut self) -> Result<(Vec<ElementId>, f64)> {
        let ids = self.state.solution().ids();
        let value = match self.value {
            Some(v) => v,
            None => *self.value.insert(self.state.oracles().value(&ids)?),
        };
        Ok((ids, value))
    }

    fn counters(&self) -> OracleCounters {
        self.state.oracles().counters()
    }
}

/// Swapping on insertions; when a solution element is deleted, reruns
/// swapping from scratch over the alive elements in insertion order.
#[derive(Debug, Clone)]
pub struct DynamicSwapping {
    state: SwapState,
    alive: AliveSet,
    value: Option<f64>,
}

impl DynamicSwapping {
    pub fn new(oracles: &Oracles) -> Self {
        DynamicSwapping {
            state: SwapState::new(oracles.fork()),
            alive: AliveSet::default(),
            value: None,
        }
    }

    pub fn alive(&self) -> &IndexSet<ElementId> {
        &self.alive.order
    }
}

impl DynamicAlgorithm for DynamicSwapping {
    fn name(&self) -> &'static str {
        "dynamic-swapping"
    }

    fn apply(&mut self, op: Operation) -> Result<()> {
        self.alive.apply(op, self.state.oracles())?;
        match op {
            Operation::Insert(e) => {
                if self.state.process(e)?.admitted() {
                    self.value = None;
                }
            }
            Operation::Delete(e) => {
                if self.state.solution().contains(e) {
                    self.state.clear();
                    self.value = None;
                    for &x in &self.alive.order {
                        self.state.process(x)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn solution(&mut self) -> Result<(Vec<ElementId>, f64)> {
        let ids = self.state.solution().ids();
        let value = match self.value {
            Some(v) => v,
            None => *self.value.insert(self.state.oracles().value(&ids)?),
        };
        Ok((ids, value))
    }

    fn counters(&self) -> OracleCounters {
        self.state.oracles().counters()
    }
}

/// Lazy greedy over the alive set after every insertion and after every
/// deletion of a solution element.
#[derive(Debug, Clone)]
pub struct DynamicGreedy {
    oracles: Oracles,
    alive: AliveSet,
    solution: Vec<ElementId>,
    value: f64,
}

impl DynamicGreedy {
    pub fn new(oracles: &Oracles) -> Self {
        DynamicGreedy {
            oracles: oracles.fork(),
            alive: AliveSet::default(),
            solution: Vec::new(),
            value: 0.0,
        }
    }

    fn rebuild(&mut self) -> Result<()> {
        let alive: Vec<ElementId> = self.alive.order.iter().copied().collect();
        let (solution, value) = lazy_greedy(&alive, &self.oracles)?;
        self.solution = solution;
        self.value = value;
        Ok(())
    }
}

impl DynamicAlgorithm for DynamicGreedy {
    fn name(&self) -> &'static str {
        "dynamic-greedy"
    }

    fn apply(&mut self, op: Operation) -> Result<()> {
        self.alive.apply(op, &self.oracles)?;
        match op {
            Operation::Insert(_) => self.rebuild(),
            Operation::Delete(e) if self.solution.contains(&e) => self.rebuild(),
            Operation::Delete(_) => Ok(()),
        }
    }

    fn solution(&mut self) -> Result<(Vec<ElementId>, f64)> {
        Ok((self.solution.clone(), self.value))
    }

    fn counters(&self) -> OracleCounters {
        self.oracles.counters()
    }
}

/// Heap entry: an upper bound on the marginal, valid as of `round`
/// (the solution size when it was computed).
#[derive(Debug, Clone, Copy)]
struct Bound {
    gain: f64,
    id: ElementId,
    round: usize,
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Bound {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Bound {}

/// Matroid greedy with lazy marginal re-evaluation. Picks the element of
/// largest marginal (ties to the smaller id) among those that keep the
/// solution independent, until the rank is reached or nothing fits.
///
/// Returns the solution in selection order and `f` of it.
pub fn lazy_greedy(elements: &[ElementId], oracles: &Oracles) -> Result<(Vec<ElementId>, f64)> {
    let rank = oracles.rank();
    let mut heap = BinaryHeap::with_capacity(elements.len());
    for &e in elements {
        heap.push(Bound {
            gain: oracles.value(&[e])?,
            id: e,
            round: 0,
        });
    }
    let mut solution = Vec::new();
    let mut f_solution = 0.0;
    while solution.len() < rank {
        let Some(top) = heap.pop() else { break };
        if top.round < solution.len() {
            let gain = oracles.marginal_given(top.id, &solution, f_solution)?;
            heap.push(Bound {
                gain,
                round: solution.len(),
                ..top
            });
            continue;
        }
        solution.push(top.id);
        if oracles.is_independent(&solution)? {
            f_solution += top.gain;
        } else {
            solution.pop();
        }
    }
    let value = if solution.is_empty() {
        0.0
    } else {
        oracles.value(&solution)?
    };
    Ok((solution, value))
}

/// Greedy with a full re-scan of every remaining element per step; the
/// reference that [`lazy_greedy`] must agree with.
pub fn eager_greedy(elements: &[ElementId], oracles: &Oracles) -> Result<(Vec<ElementId>, f64)> {
    let rank = oracles.rank();
    let mut remaining: Vec<ElementId> = elements.to_vec();
    let mut solution = Vec::new();
    let mut f_solution = 0.0;
    while solution.len() < rank && !remaining.is_empty() {
        let mut best: Option<(f64, ElementId)> = None;
        let mut dependent = Vec::new();
        for &e in &remaining {
            let mut trial = solution.clone();
            trial.push(e);
            if !oracles.is_independent(&trial)? {
                dependent.push(e);
                continue;
            }
            let gain = oracles.marginal_given(e, &solution, f_solution)?;
            let better = match best {
                None => true,
                Some((g, id)) => gain.total_cmp(&g).then_with(|| id.cmp(&e)) == Ordering::Greater,
            };
            if better {
                best = Some((gain, e));
            }
        }
        let Some((gain, e)) = best else { break };
        solution.push(e);
        f_solution += gain;
        remaining.retain(|x| *x != e && !dependent.contains(x));
    }
    let value = if solution.is_empty() {
        0.0
    } else {
        oracles.value(&solution)?
    };
    Ok((solution, value))
}

pub const BRUTE_FORCE_MAX_ELEMENTS: usize = 20;
pub const BRUTE_FORCE_MAX_RANK: usize = 5;

/// Exact optimum over independent subsets of `alive`, by depth-first
/// enumeration in lexicographic id order (dependent prefixes are pruned).
/// Among sets of equal value the lexicographically smallest sorted id
/// vector wins. Uses the oracles without counting.
pub fn brute_force_opt(alive: &[ElementId], oracles: &Oracles) -> Result<(Vec<ElementId>, f64)> {
    let rank = oracles.rank().min(alive.len());
    if alive.len() > BRUTE_FORCE_MAX_ELEMENTS || rank > BRUTE_FORCE_MAX_RANK {
        return Err(Error::BudgetExceeded {
            elements: alive.len(),
            rank,
            max_elements: BRUTE_FORCE_MAX_ELEMENTS,
            max_rank: BRUTE_FORCE_MAX_RANK,
        });
    }
    let mut sorted = alive.to_vec();
    sorted.sort();
    sorted.dedup();
    for &e in &sorted {
        oracles.check(e)?;
    }
    let mut search = Search {
        elements: &sorted,
        oracles,
        rank,
        current: Vec::new(),
        best: (Vec::new(), 0.0),
    };
    search.descend(0)?;
    Ok(search.best)
}

struct Search<'a> {
    elements: &'a [ElementId],
    oracles: &'a Oracles,
    rank: usize,
    current: Vec<ElementId>,
    best: (Vec<ElementId>, f64),
}

impl Search<'_> {
    fn descend(&mut self, from: usize) -> Result<()> {
        if self.current.len() == self.rank {
            return Ok(());
        }
        for i in from..self.elements.len() {
            self.current.push(self.elements[i]);
            if self.oracles.matroid().is_independent(&self.current)? {
                let v = self.oracles.function().evaluate(&self.current)?;
                if v > self.best.1 {
                    self.best = (self.current.clone(), v);
                }
                self.descend(i + 1)?;
            }
            self.current.pop();
        }
        Ok(())
    }
}
