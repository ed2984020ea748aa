//! Insertion-only streaming: threshold swapping, with plain swapping as the
//! `τ = 0` case.
//!
//! Every arriving element gets the weight `w(e) = f(e | S′)`. Elements below
//! `(ε/k)·τ` are ignored outright. The rest are added when `S + e` is
//! independent, or swapped in for the lightest exchangeable member `s_e`
//! when `w(e) > 2·w(s_e)`.

use crate::error::Result;
use crate::oracles::{ElementId, Oracles};
use crate::solution::{SwapCandidate, WeightedSolution};

/// What happened to one streamed element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// Weight under `(ε/k)·τ`; not recorded in the history.
    BelowThreshold,
    AddedNoSwap,
    /// Admitted in exchange for the given member.
    Swapped(ElementId),
    /// Failed the swap test (or no exchange exists).
    Rejected,
}

impl Decision {
    pub fn admitted(&self) -> bool {
        matches!(self, Decision::AddedNoSwap | Decision::Swapped(_))
    }
}

#[derive(Debug, Clone)]
pub struct SwapState {
    sol: WeightedSolution,
    rank: usize,
    epsilon: f64,
    tau: f64,
    oracles: Oracles,
}

impl SwapState {
    /// Plain swapping (`ε = τ = 0`).
    pub fn new(oracles: Oracles) -> Self {
        Self::with_threshold(oracles, 0.0, 0.0)
    }

    pub fn with_threshold(oracles: Oracles, epsilon: f64, tau: f64) -> Self {
        SwapState {
            sol: WeightedSolution::new(),
            rank: oracles.rank().max(1),
            epsilon,
            tau,
            oracles,
        }
    }

    pub fn solution(&self) -> &WeightedSolution {
        &self.sol
    }

    pub fn oracles(&self) -> &Oracles {
        &self.oracles
    }

    pub fn into_solution(self) -> WeightedSolution {
        self.sol
    }

    /// `(ε/k)·τ`
    pub fn threshold(&self) -> f64 {
        self.epsilon / self.rank as f64 * self.tau
    }

    /// Drops the solution and history; keeps parameters and counters.
    pub fn clear(&mut self) {
        self.sol = WeightedSolution::new();
    }

    /// One value call for the weight (the history value is carried as
    /// `w(S′)`), then the swap search.
    pub fn process(&mut self, e: ElementId) -> Result<Decision> {
        let w = self
            .oracles
            .marginal_given(e, self.sol.history_ids(), self.sol.history_weight())?;
        if w < self.threshold() {
            return Ok(Decision::BelowThreshold);
        }
        match self.sol.find_swap_binary(e, &self.oracles)? {
            SwapCandidate::Free => {
                self.sol.admit(e, w, None)?;
                Ok(Decision::AddedNoSwap)
            }
            SwapCandidate::Swap(y) if 2.0 * y.weight < w => {
                debug_assert!(w > 2.0 * y.weight);
                self.sol.admit(e, w, Some(y.id))?;
                Ok(Decision::Swapped(y.id))
            }
            SwapCandidate::Swap(_) | SwapCandidate::Blocked => Ok(Decision::Rejected),
        }
    }
}

/// Runs threshold swapping over an insertion-only stream.
pub fn run_stream(
    elements: impl IntoIterator<Item = ElementId>,
    oracles: &Oracles,
    epsilon: f64,
    tau: f64,
) -> Result<(WeightedSolution, Vec<Decision>)> {
    let mut state = SwapState::with_threshold(oracles.clone(), epsilon, tau);
    let decisions = elements
        .into_iter()
        .map(|e| state.process(e))
        .collect::<Result<Vec<_>>>()?;
    Ok((state.into_solution(), decisions))
}
