//! Reference oracles for tests, computed straight from a universe
//! description with plain sets and exhaustive enumeration. They share no
//! code with the library's oracles.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use dynsub::harness::universe::{FunctionSpec, MatroidSpec};
use dynsub::harness::{synthesize, FunctionKind, MatroidKind, StreamSpec, SynthSpec, Universe};
use dynsub::{ElementId, Operation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn element(u: &Universe, e: ElementId) -> &dynsub::harness::universe::ElementSpec {
    u.elements.iter().find(|x| x.id == e).expect("element in universe")
}

pub fn naive_value(u: &Universe, set: &[ElementId]) -> f64 {
    let set: BTreeSet<ElementId> = set.iter().copied().collect();
    match &u.function {
        FunctionSpec::Modular => set.iter().map(|&e| element(u, e).weight.unwrap()).sum::<f64>() + 0.0,
        FunctionSpec::Geometric { base } => set
            .iter()
            .map(|&e| base.powi(element(u, e).exponent.unwrap()))
            .sum::<f64>()
            + 0.0,
        FunctionSpec::Coverage { items } => {
            let covered: BTreeSet<u64> = set
                .iter()
                .flat_map(|&e| element(u, e).covers.clone().unwrap())
                .collect();
            items
                .iter()
                .filter(|i| covered.contains(&i.id))
                .map(|i| i.weight)
                .sum::<f64>()
                + 0.0
        }
        FunctionSpec::FacilityLocation { clients } => clients
            .iter()
            .map(|c| {
                set.iter()
                    .map(|&e| {
                        let p = element(u, e).point.clone().unwrap();
                        let d = c.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                        1.0 / (1.0 + d)
                    })
                    .fold(0.0, f64::max)
            })
            .sum::<f64>()
            + 0.0,
    }
}

/// Whether the edge multiset is a forest: no self-loops and, in every
/// connected component, one edge fewer than vertices.
fn is_forest(edges: &[(usize, usize)]) -> bool {
    if edges.iter().any(|(a, b)| a == b) {
        return false;
    }
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut seen = BTreeSet::new();
    let mut components = 0;
    for &start in adj.keys() {
        if !seen.insert(start) {
            continue;
        }
        components += 1;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &adj[&v] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
    }
    edges.len() + components == seen.len()
}

pub fn naive_independent(u: &Universe, set: &[ElementId]) -> bool {
    match &u.matroid {
        MatroidSpec::Uniform { rank } => set.len() <= *rank,
        MatroidSpec::Partition { parts } => {
            let mut used: BTreeMap<u64, usize> = BTreeMap::new();
            for &e in set {
                *used.entry(element(u, e).part.unwrap()).or_default() += 1;
            }
            used.iter()
                .all(|(p, n)| parts.iter().any(|q| q.id == *p && *n <= q.capacity))
        }
        MatroidSpec::Graphic { .. } => {
            let edges: Vec<(usize, usize)> = set.iter().map(|&e| element(u, e).edge.unwrap()).collect();
            is_forest(&edges)
        }
    }
}

/// Exhaustive optimum over every subset of `alive` (bitmask enumeration).
pub fn naive_opt(u: &Universe, alive: &[ElementId]) -> f64 {
    assert!(alive.len() <= 16, "exhaustive enumeration limited to 16 elements");
    let mut best = 0.0f64;
    for mask in 0u32..(1 << alive.len()) {
        let set: Vec<ElementId> = (0..alive.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| alive[i])
            .collect();
        if naive_independent(u, &set) {
            best = best.max(naive_value(u, &set));
        }
    }
    best
}

/// A random small instance from the family used by the approximation
/// checks: up to 14 elements, rank up to 3, uniform or partition matroid,
/// coverage or modular function.
pub fn small_instance(seed: u64) -> (Universe, Vec<Operation>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa11ce);
    let spec = SynthSpec {
        elements: rng.gen_range(4..=14),
        function: if rng.gen_bool(0.5) {
            FunctionKind::Coverage
        } else {
            FunctionKind::Modular
        },
        matroid: if rng.gen_bool(0.5) {
            MatroidKind::Uniform
        } else {
            MatroidKind::Partition
        },
        rank: rng.gen_range(1..=3),
    };
    let u = synthesize(&spec, seed).unwrap();
    let stream = StreamSpec::Random {
        n: rng.gen_range(10..=40),
        p: rng.gen_range(0.2..0.5),
        seed,
    };
    let ops = stream.generate(&u.ids()).unwrap();
    (u, ops)
}

pub fn alive_after(ops: &[Operation]) -> Vec<Vec<ElementId>> {
    let mut alive = BTreeSet::new();
    ops.iter()
        .map(|op| {
            match *op {
                Operation::Insert(e) => alive.insert(e),
                Operation::Delete(e) => alive.remove(&e),
            };
            alive.iter().copied().collect()
        })
        .collect()
}
