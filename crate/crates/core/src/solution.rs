//! The weight-sorted candidate solution and its history set.
//!
//! Members are kept in a strict total order: weight descending, then id
//! ascending. A member's weight is frozen when it is admitted and never
//! recomputed. The history set `S′` records every element ever admitted,
//! including those later swapped out (`K = S′ \ S`).

use std::cmp::Ordering;

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::oracles::{ElementId, Oracles};

/// Admitted element together with its frozen weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub id: ElementId,
    pub weight: f64,
}

impl Member {
    /// Position in the solution order: heavier first, then smaller id.
    pub fn order(&self, other: &Member) -> Ordering {
        other
            .weight
            .total_cmp(&self.weight)
            .then(self.id.cmp(&other.id))
    }
}

/// Outcome of looking for the element to evict when `e` arrives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwapCandidate {
    /// `S + e` is independent; nothing needs to leave.
    Free,
    /// The minimum-weight member `y` with `S − y + e` independent.
    Swap(Member),
    /// No member can make room: `e` is a loop of the matroid.
    Blocked,
}

#[derive(Debug, Clone, Default)]
pub struct WeightedSolution {
    members: Vec<Member>,
    history: IndexSet<ElementId>,
    /// `history` in admission order, kept as a plain slice for oracle calls.
    history_order: Vec<ElementId>,
    history_weight: f64,
    swapped_out_weight: f64,
}

impl WeightedSolution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Members in solution order.
    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn ids(&self) -> Vec<ElementId> {
        self.members.iter().map(|m| m.id).collect()
    }

    /// `S′` in admission order.
    pub fn history(&self) -> &IndexSet<ElementId> {
        &self.history
    }

    pub fn history_ids(&self) -> &[ElementId] {
        &self.history_order
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: ElementId) -> bool {
        self.members.iter().any(|m| m.id == id)
    }

    pub fn weight_of(&self, id: ElementId) -> Option<f64> {
        self.members.iter().find(|m| m.id == id).map(|m| m.weight)
    }

    /// `w(S)`.
    pub fn weight(&self) -> f64 {
        self.members.iter().fold(0.0, |acc, m| acc + m.weight)
    }

    /// `w(K)`, the total frozen weight of swapped-out elements.
    pub fn swapped_out_weight(&self) -> f64 {
        self.swapped_out_weight
    }

    /// `w(S′)`. Equals `f(S′)` because every weight is the marginal gain
    /// against the history at admission time.
    pub fn history_weight(&self) -> f64 {
        self.history_weight
    }

    /// Inserts `id` with frozen weight `weight`, evicting `swap_out` if given.
    pub fn admit(&mut self, id: ElementId, weight: f64, swap_out: Option<ElementId>) -> Result<()> {
        if let Some(out) = swap_out {
            let pos = self
                .members
                .iter()
                .position(|m| m.id == out)
                .ok_or(Error::NotAMember(out))?;
            let removed = self.members.remove(pos);
            self.swapped_out_weight += removed.weight;
        }
        let member = Member { id, weight };
        let pos = self
            .members
            .partition_point(|m| m.order(&member) == Ordering::Less);
        self.members.insert(pos, member);
        if self.history.insert(id) {
            self.history_order.push(id);
            self.history_weight += weight;
        }
        Ok(())
    }

    /// Swap candidate for `e` via binary search over the weight-sorted
    /// prefix. At most `⌈log₂(k+1)⌉ + 1` independence calls.
    pub fn find_swap_binary(&self, e: ElementId, oracles: &Oracles) -> Result<SwapCandidate> {
        let mut probe: Vec<ElementId> = Vec::with_capacity(self.members.len() + 1);
        probe.extend(self.members.iter().map(|m| m.id));
        probe.push(e);
        if oracles.is_independent(&probe)? {
            return Ok(SwapCandidate::Free);
        }
        // Largest i in 1..=j with {x_1..x_{i-1}} + e independent; x_i is
        // the answer. `lo` holds (a virtual) true, `hi` a known false.
        let (mut lo, mut hi) = (0usize, self.members.len() + 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            probe.clear();
            probe.extend(self.members[..mid - 1].iter().map(|m| m.id));
            probe.push(e);
            if oracles.is_independent(&probe)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(if lo == 0 {
            SwapCandidate::Blocked
        } else {
            SwapCandidate::Swap(self.members[lo - 1])
        })
    }

    /// Reference swap finder: scans members from lightest to heaviest and
    /// returns the first whose removal makes room for `e`. Linear in `k`.
    pub fn find_swap_linear(&self, e: ElementId, oracles: &Oracles) -> Result<SwapCandidate> {
        let mut probe: Vec<ElementId> = self.members.iter().map(|m| m.id).collect();
        probe.push(e);
        if oracles.is_independent(&probe)? {
            return Ok(SwapCandidate::Free);
        }
        for (i, y) in self.members.iter().enumerate().rev() {
            let probe: Vec<ElementId> = self
                .members
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, m)| m.id)
                .chain(std::iter::once(e))
                .collect();
            if oracles.is_independent(&probe)? {
                return Ok(SwapCandidate::Swap(*y));
            }
        }
        Ok(SwapCandidate::Blocked)
    }

    /// Budget for [`find_swap_binary`](Self::find_swap_binary) on a matroid of rank `k`.
    pub fn binary_search_budget(k: usize) -> u64 {
        let mut bits = 0u64;
        while (1usize << bits) < k + 1 {
            bits += 1;
        }
        bits + 1
    }

    /// Evaluates the three weight properties that hold for any solution
    /// built by the swapping family. Two value calls.
    pub fn w_properties_check(&self, oracles: &Oracles) -> Result<WProperties> {
        let f_s = oracles.value(&self.ids())?;
        let f_history = oracles.value(self.history_ids())?;
        let w_s = self.weight();
        let w_k = self.swapped_out_weight;
        let w_history = self.history_weight;
        let tol = |x: f64| W_PROPERTY_TOLERANCE * x.abs().max(1.0);
        Ok(WProperties {
            swapped_out_bounded: w_k <= w_s + tol(w_s),
            weight_below_value: w_s <= f_s + tol(f_s),
            history_exact: (f_history - w_history).abs() <= tol(w_history),
            w_s,
            w_k,
            f_s,
            w_history,
            f_history,
        })
    }
}

/// Relative tolerance for the floating-point comparisons in
/// [`WeightedSolution::w_properties_check`].
pub const W_PROPERTY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WProperties {
    /// `w(K) ≤ w(S)`
    pub swapped_out_bounded: bool,
    /// `w(S) ≤ f(S)`
    pub weight_below_value: bool,
    /// `f(S′) = w(S′)`
    pub history_exact: bool,
    pub w_s: f64,
    pub w_k: f64,
    pub f_s: f64,
    pub w_history: f64,
    pub f_history: f64,
}

impl WProperties {
    pub fn all_hold(&self) -> bool {
        self.swapped_out_bounded && self.weight_below_value && self.history_exact
    }
}
