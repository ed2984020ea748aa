use std::collections::{HashMap, HashSet};

use super::{ElementId, Matroid};
use crate::error::{Error, Result};

/// `|S| ≤ k`.
#[derive(Debug, Clone)]
pub struct UniformMatroid {
    universe: HashSet<ElementId>,
    k: usize,
}

impl UniformMatroid {
    pub fn new(universe: impl IntoIterator<Item = ElementId>, k: usize) -> Self {
        UniformMatroid {
            universe: universe.into_iter().collect(),
            k,
        }
    }
}

impl Matroid for UniformMatroid {
    fn contains(&self, e: ElementId) -> bool {
        self.universe.contains(&e)
    }

    fn is_independent(&self, set: &[ElementId]) -> Result<bool> {
        if let Some(&e) = set.iter().find(|e| !self.universe.contains(e)) {
            return Err(Error::UnknownElement(e));
        }
        Ok(set.len() <= self.k)
    }

    fn rank(&self) -> usize {
        self.k.min(self.universe.len())
    }
}

/// Elements are split into labelled parts; a set is independent when it
/// takes at most `capacity(p)` elements from every part `p`.
#[derive(Debug, Clone)]
pub struct PartitionMatroid {
    part_of: HashMap<ElementId, usize>,
    capacities: Vec<usize>,
    rank: usize,
}

impl PartitionMatroid {
    /// `parts` pairs every part label with its capacity; `elements` assigns
    /// each element a part label.
    pub fn new(
        parts: impl IntoIterator<Item = (u64, usize)>,
        elements: impl IntoIterator<Item = (ElementId, u64)>,
    ) -> Result<Self> {
        let mut label_index = HashMap::new();
        let mut capacities = Vec::new();
        for (label, cap) in parts {
            if label_index.insert(label, capacities.len()).is_some() {
                return Err(Error::InvalidUniverse(format!("duplicate part {label}")));
            }
            capacities.push(cap);
        }
        let mut part_of = HashMap::new();
        let mut sizes = vec![0usize; capacities.len()];
        for (e, label) in elements {
            let p = *label_index.get(&label).ok_or_else(|| {
                Error::InvalidUniverse(format!("element {e} refers to unknown part {label}"))
            })?;
            if part_of.insert(e, p).is_some() {
                return Err(Error::InvalidUniverse(format!("duplicate element {e}")));
            }
            sizes[p] += 1;
        }
        let rank = sizes.iter().zip(&capacities).map(|(s, c)| (*s).min(*c)).sum();
        Ok(PartitionMatroid {
            part_of,
            capacities,
            rank,
        })
    }
}

impl Matroid for PartitionMatroid {
    fn contains(&self, e: ElementId) -> bool {
        self.part_of.contains_key(&e)
    }

    fn is_independent(&self, set: &[ElementId]) -> Result<bool> {
        let mut used = vec![0usize; self.capacities.len()];
        let mut ok = true;
        for &e in set {
            let p = *self.part_of.get(&e).ok_or(Error::UnknownElement(e))?;
            used[p] += 1;
            ok &= used[p] <= self.capacities[p];
        }
        Ok(ok)
    }

    fn rank(&self) -> usize {
        self.rank
    }
}

/// Cycle matroid of a multigraph: a set of edges is independent when it is
/// a forest. Each query rebuilds a union-find over the queried edges.
#[derive(Debug, Clone)]
pub struct GraphicMatroid {
    edges: HashMap<ElementId, (usize, usize)>,
    vertices: usize,
    rank: usize,
}

impl GraphicMatroid {
    pub fn new(
        vertices: usize,
        edges: impl IntoIterator<Item = (ElementId, (usize, usize))>,
    ) -> Result<Self> {
        let mut map = HashMap::new();
        let mut dsu = DisjointSets::new(vertices);
        let mut rank = 0;
        for (e, (u, v)) in edges {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidUniverse(format!(
                    "edge {e} = ({u}, {v}) leaves the vertex range 0..{vertices}"
                )));
            }
            if map.insert(e, (u, v)).is_some() {
                return Err(Error::InvalidUniverse(format!("duplicate element {e}")));
            }
            if dsu.union(u, v) {
                rank += 1;
            }
        }
        Ok(GraphicMatroid {
            edges: map,
            vertices,
            rank,
        })
    }
}

impl Matroid for GraphicMatroid {
    fn contains(&self, e: ElementId) -> bool {
        self.edges.contains_key(&e)
    }

    fn is_independent(&self, set: &[ElementId]) -> Result<bool> {
        let mut dsu = DisjointSets::new(self.vertices);
        let mut ok = true;
        for &e in set {
            let &(u, v) = self.edges.get(&e).ok_or(Error::UnknownElement(e))?;
            ok &= dsu.union(u, v);
        }
        Ok(ok)
    }

    fn rank(&self) -> usize {
        self.rank
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// False when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}
