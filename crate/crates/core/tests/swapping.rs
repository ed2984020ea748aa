mod common;

use dynsub::harness::{synthesize, FunctionKind, MatroidKind, SynthSpec};
use dynsub::solution::{SwapCandidate, WeightedSolution};
use dynsub::swapping::{run_stream, Decision, SwapState};
use dynsub::{ElementId, Oracles};
use proptest::prelude::*;

fn oracles(function: FunctionKind, matroid: MatroidKind, n: usize, rank: usize, seed: u64) -> Oracles {
    synthesize(&SynthSpec { elements: n, function, matroid, rank }, seed)
        .unwrap()
        .build()
        .unwrap()
        .oracles
}

fn matroid_kind(i: u8) -> MatroidKind {
    [MatroidKind::Uniform, MatroidKind::Partition, MatroidKind::Graphic][i as usize % 3]
}

fn function_kind(i: u8) -> FunctionKind {
    [FunctionKind::Modular, FunctionKind::Coverage, FunctionKind::FacilityLocation][i as usize % 3]
}

/// Reference swap search: scan members from lightest to heaviest and
/// return the first whose removal makes room for `e`.
fn reference_swap(sol: &WeightedSolution, e: ElementId, o: &Oracles) -> SwapCandidate {
    let m = o.matroid();
    let ids = sol.ids();
    if m.is_independent(&[ids.clone(), vec![e]].concat()).unwrap() {
        return SwapCandidate::Free;
    }
    for member in sol.members().iter().rev() {
        let trial: Vec<ElementId> = ids.iter().copied().filter(|&x| x != member.id).chain([e]).collect();
        if m.is_independent(&trial).unwrap() {
            return SwapCandidate::Swap(*member);
        }
    }
    SwapCandidate::Blocked
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn binary_swap_search_agrees_with_linear_scans(
        kind in 0u8..3,
        rank in 1usize..7,
        seed in 0u64..1000,
        order in Just((1..=16u64).collect::<Vec<_>>()).prop_shuffle(),
        weights in proptest::collection::vec(1u32..6, 16),
        pick in 1u64..=16,
    ) {
        let o = oracles(FunctionKind::Modular, matroid_kind(kind), 16, rank, seed);
        let mut sol = WeightedSolution::new();
        for (&i, &w) in order.iter().zip(&weights) {
            let e = ElementId(i);
            if e == ElementId(pick) {
                continue;
            }
            if o.matroid().is_independent(&[sol.ids(), vec![e]].concat()).unwrap() {
                // small integer weights force plenty of ties
                sol.admit(e, f64::from(w), None).unwrap();
            }
        }
        let e = ElementId(pick);
        let before = o.counters();
        let binary = sol.find_swap_binary(e, &o).unwrap();
        let spent = o.counters().delta_since(before).independence_calls;
        let linear = sol.find_swap_linear(e, &o).unwrap();
        prop_assert_eq!(binary, linear);
        prop_assert_eq!(binary, reference_swap(&sol, e, &o));
        prop_assert!(spent <= WeightedSolution::binary_search_budget(sol.len()));
    }

    #[test]
    fn zero_threshold_decides_like_plain_swapping(
        fk in 0u8..3,
        mk in 0u8..3,
        rank in 1usize..5,
        seed in 0u64..1000,
        eps in 0.01f64..1.0,
        order in Just((1..=12u64).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let o = oracles(function_kind(fk), matroid_kind(mk), 12, rank, seed);
        let ids: Vec<ElementId> = order.into_iter().map(ElementId).collect();
        let (plain, d_plain) = run_stream(ids.clone(), &o, 0.0, 0.0).unwrap();
        let (thr, d_thr) = run_stream(ids, &o, eps, 0.0).unwrap();
        prop_assert_eq!(d_plain, d_thr);
        prop_assert_eq!(plain.members(), thr.members());
    }

    #[test]
    fn weight_properties_hold_throughout(
        fk in 0u8..3,
        mk in 0u8..3,
        rank in 1usize..5,
        seed in 0u64..1000,
        order in Just((1..=12u64).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let o = oracles(function_kind(fk), matroid_kind(mk), 12, rank, seed);
        let mut s = SwapState::new(o.clone());
        for i in order {
            s.process(ElementId(i)).unwrap();
            let p = s.solution().w_properties_check(&o).unwrap();
            prop_assert!(p.all_hold(), "{p:?}");
            prop_assert!(o.matroid().is_independent(&s.solution().ids()).unwrap());
        }
    }
}

#[test]
fn swapping_is_four_approximate_on_small_instances() {
    for seed in 0..60 {
        let (u, ops) = common::small_instance(seed);
        let o = u.build().unwrap().oracles;
        let inserts: Vec<ElementId> = ops
            .iter()
            .filter(|op| op.is_insert())
            .map(|op| op.element())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let (sol, _) = run_stream(inserts.clone(), &o, 0.0, 0.0).unwrap();
        let f = common::naive_value(&u, &sol.ids());
        let opt = common::naive_opt(&u, &inserts);
        assert!(4.0 * f >= opt, "seed {seed}: f = {f}, OPT = {opt}");
    }
}

#[test]
fn swap_chain_weights_at_least_double() {
    // rank 1: every admission after the first is a swap, so weights along
    // the chain more than double
    let o = oracles(FunctionKind::Modular, MatroidKind::Uniform, 16, 1, 3);
    let mut s = SwapState::new(o);
    let mut last = 0.0;
    for i in 1..=16 {
        if let Decision::Swapped(_) | Decision::AddedNoSwap = s.process(ElementId(i)).unwrap() {
            let w = s.solution().members()[0].weight;
            assert!(w > 2.0 * last);
            last = w;
        }
    }
}
