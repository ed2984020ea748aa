use std::collections::HashMap;

use super::{ElementId, SubmodularFunction};
use crate::error::{Error, Result};

fn index_of(index: &HashMap<ElementId, usize>, e: ElementId) -> Result<usize> {
    index.get(&e).copied().ok_or(Error::UnknownElement(e))
}

fn check_weight(what: &str, w: f64) -> Result<f64> {
    if w.is_finite() && w >= 0.0 {
        Ok(w)
    } else {
        Err(Error::InvalidUniverse(format!(
            "{what} must be a finite non-negative number, got {w}"
        )))
    }
}

/// `f(S) = Σ_{e ∈ S} w(e)`.
#[derive(Debug, Clone)]
pub struct Modular {
    index: HashMap<ElementId, usize>,
    weights: Vec<f64>,
}

impl Modular {
    pub fn new(weights: impl IntoIterator<Item = (ElementId, f64)>) -> Result<Self> {
        let mut index = HashMap::new();
        let mut ws = Vec::new();
        for (e, w) in weights {
            if index.insert(e, ws.len()).is_some() {
                return Err(Error::InvalidUniverse(format!("duplicate element {e}")));
            }
            ws.push(check_weight("weight", w)?);
        }
        Ok(Modular { index, weights: ws })
    }

    /// Weights `base^exponent`. Fails when a weight, or the sum of all of
    /// them, is not representable as a finite binary64 value.
    pub fn geometric(base: f64, exponents: impl IntoIterator<Item = (ElementId, i32)>) -> Result<Self> {
        if !(base.is_finite() && base > 0.0) {
            return Err(Error::InvalidUniverse(format!("geometric base must be positive, got {base}")));
        }
        let weights: Vec<(ElementId, f64)> =
            exponents.into_iter().map(|(e, x)| (e, base.powi(x))).collect();
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if !total.is_finite() {
            return Err(Error::InvalidUniverse(
                "geometric weights overflow binary64".to_string(),
            ));
        }
        Modular::new(weights)
    }

    pub fn weight(&self, e: ElementId) -> Result<f64> {
        Ok(self.weights[index_of(&self.index, e)?])
    }
}

impl SubmodularFunction for Modular {
    fn contains(&self, e: ElementId) -> bool {
        self.index.contains_key(&e)
    }

    fn evaluate(&self, set: &[ElementId]) -> Result<f64> {
        set.iter().try_fold(0.0, |acc, &e| Ok(acc + self.weight(e)?))
    }

    fn marginal(&self, e: ElementId, set: &[ElementId], _base: Option<f64>) -> Result<f64> {
        let w = self.weight(e)?;
        for &x in set {
            self.weight(x)?;
        }
        Ok(if set.contains(&e) { 0.0 } else { w })
    }
}

/// Weighted coverage: every element covers a set of items, and `f(S)` is the
/// total weight of the items covered by at least one member of `S`.
#[derive(Debug, Clone)]
pub struct WeightedCoverage {
    index: HashMap<ElementId, usize>,
    covers: Vec<Vec<usize>>,
    item_weights: Vec<f64>,
}

impl WeightedCoverage {
    /// `items` maps item labels to weights; `elements` lists the item labels
    /// each element covers.
    pub fn new(
        items: impl IntoIterator<Item = (u64, f64)>,
        elements: impl IntoIterator<Item = (ElementId, Vec<u64>)>,
    ) -> Result<Self> {
        let mut item_index = HashMap::new();
        let mut item_weights = Vec::new();
        for (label, w) in items {
            if item_index.insert(label, item_weights.len()).is_some() {
                return Err(Error::InvalidUniverse(format!("duplicate item {label}")));
            }
            item_weights.push(check_weight("item weight", w)?);
        }
        let mut index = HashMap::new();
        let mut covers = Vec::new();
        for (e, labels) in elements {
            let mut dense = Vec::with_capacity(labels.len());
            for label in labels {
                let i = *item_index.get(&label).ok_or_else(|| {
                    Error::InvalidUniverse(format!("element {e} covers unknown item {label}"))
                })?;
                if !dense.contains(&i) {
                    dense.push(i);
                }
            }
            if index.insert(e, covers.len()).is_some() {
                return Err(Error::InvalidUniverse(format!("duplicate element {e}")));
            }
            covers.push(dense);
        }
        Ok(WeightedCoverage {
            index,
            covers,
            item_weights,
        })
    }

    fn covered(&self, set: &[ElementId]) -> Result<Vec<bool>> {
        let mut covered = vec![false; self.item_weights.len()];
        for &x in set {
            for &i in &self.covers[index_of(&self.index, x)?] {
                covered[i] = true;
            }
        }
        Ok(covered)
    }
}

impl SubmodularFunction for WeightedCoverage {
    fn contains(&self, e: ElementId) -> bool {
        self.index.contains_key(&e)
    }

    fn evaluate(&self, set: &[ElementId]) -> Result<f64> {
        let covered = self.covered(set)?;
        Ok(covered
            .iter()
            .zip(&self.item_weights)
            .filter(|(c, _)| **c)
            .fold(0.0, |acc, (_, w)| acc + w))
    }

    fn marginal(&self, e: ElementId, set: &[ElementId], _base: Option<f64>) -> Result<f64> {
        let own = &self.covers[index_of(&self.index, e)?];
        let covered = self.covered(set)?;
        Ok(own
            .iter()
            .filter(|&&i| !covered[i])
            .fold(0.0, |acc, &i| acc + self.item_weights[i]))
    }
}

/// Facility location: `f(S) = Σ_c max_{e ∈ S} sim(c, e)` with
/// `sim(c, e) = 1 / (1 + ‖c − e‖₂)` between client and facility coordinates.
#[derive(Debug, Clone)]
pub struct FacilityLocation {
    index: HashMap<ElementId, usize>,
    /// `similarity[e][c]`
    similarity: Vec<Vec<f64>>,
    clients: usize,
}

impl FacilityLocation {
    pub fn new(
        clients: &[Vec<f64>],
        facilities: impl IntoIterator<Item = (ElementId, Vec<f64>)>,
    ) -> Result<Self> {
        let dim = clients.first().map(Vec::len).unwrap_or(0);
        if clients.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidUniverse("clients have mixed dimensions".into()));
        }
        let mut index = HashMap::new();
        let mut similarity = Vec::new();
        for (e, point) in facilities {
            if !clients.is_empty() && point.len() != dim {
                return Err(Error::InvalidUniverse(format!(
                    "element {e} has dimension {}, clients have {dim}",
                    point.len()
                )));
            }
            let row = clients
                .iter()
                .map(|c| {
                    let d2: f64 = c.iter().zip(&point).map(|(a, b)| (a - b) * (a - b)).sum();
                    1.0 / (1.0 + d2.sqrt())
                })
                .collect();
            if index.insert(e, similarity.len()).is_some() {
                return Err(Error::InvalidUniverse(format!("duplicate element {e}")));
            }
            similarity.push(row);
        }
        Ok(FacilityLocation {
            index,
            similarity,
            clients: clients.len(),
        })
    }

    fn best(&self, set: &[ElementId]) -> Result<Vec<f64>> {
        let mut best = vec![0.0f64; self.clients];
        for &x in set {
            let row = &self.similarity[index_of(&self.index, x)?];
            for (b, &s) in best.iter_mut().zip(row) {
                *b = b.max(s);
            }
        }
        Ok(best)
    }
}

impl SubmodularFunction for FacilityLocation {
    fn contains(&self, e: ElementId) -> bool {
        self.index.contains_key(&e)
    }

    fn evaluate(&self, set: &[ElementId]) -> Result<f64> {
        Ok(self.best(set)?.iter().fold(0.0, |acc, b| acc + b))
    }

    fn marginal(&self, e: ElementId, set: &[ElementId], _base: Option<f64>) -> Result<f64> {
        let row = &self.similarity[index_of(&self.index, e)?];
        let best = self.best(set)?;
        Ok(row
            .iter()
            .zip(&best)
            .fold(0.0, |acc, (s, b)| acc + (s - b).max(0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u64]) -> Vec<ElementId> {
        v.iter().copied().map(ElementId).collect()
    }

    #[test]
    fn modular_singleton_and_empty() {
        let f = Modular::new([(ElementId(1), 3.0), (ElementId(2), 5.0)]).unwrap();
        assert_eq!(f.evaluate(&ids(&[1])).unwrap(), 3.0);
        assert_eq!(f.evaluate(&[]).unwrap(), 0.0);
        assert_eq!(f.marginal(ElementId(2), &ids(&[1]), None).unwrap(), 5.0);
        assert_eq!(f.marginal(ElementId(1), &ids(&[1]), None).unwrap(), 0.0);
    }

    #[test]
    fn coverage_counts_union() {
        // e covers {1,2}, e' covers {2,3}; all items weigh 1.
        let f = WeightedCoverage::new(
            [(1, 1.0), (2, 1.0), (3, 1.0)],
            [(ElementId(10), vec![1, 2]), (ElementId(11), vec![2, 3])],
        )
        .unwrap();
        assert_eq!(f.evaluate(&ids(&[10, 11])).unwrap(), 3.0);
        assert_eq!(f.marginal(ElementId(11), &ids(&[10]), None).unwrap(), 1.0);
        assert_eq!(f.marginal(ElementId(10), &ids(&[10]), None).unwrap(), 0.0);
        assert_eq!(f.evaluate(&[]).unwrap(), 0.0);
    }

    #[test]
    fn coverage_rejects_unknown_item() {
        let err = WeightedCoverage::new([(1, 1.0)], [(ElementId(1), vec![7])]);
        assert!(err.is_err());
    }

    #[test]
    fn facility_location_takes_best_facility_per_client() {
        let clients = vec![vec![0.0, 0.0], vec![10.0, 0.0]];
        let f = FacilityLocation::new(
            &clients,
            [(ElementId(1), vec![0.0, 0.0]), (ElementId(2), vec![10.0, 0.0])],
        )
        .unwrap();
        let one = f.evaluate(&ids(&[1])).unwrap();
        assert!((one - (1.0 + 1.0 / 11.0)).abs() < 1e-12);
        assert!((f.evaluate(&ids(&[1, 2])).unwrap() - (2.0)).abs() < 1e-12);
        let gain = f.marginal(ElementId(2), &ids(&[1]), None).unwrap();
        assert!((gain - (1.0 - 1.0 / 11.0)).abs() < 1e-12);
    }

    #[test]
    fn geometric_weights_and_overflow() {
        let f = Modular::geometric(3.0, [(ElementId(1), 1), (ElementId(2), 2)]).unwrap();
        assert_eq!(f.evaluate(&ids(&[1, 2])).unwrap(), 12.0);
        assert!(Modular::geometric(3.0, [(ElementId(1), 700)]).is_err());
    }

    #[test]
    fn default_marginal_matches_override() {
        #[derive(Debug)]
        struct Plain(WeightedCoverage);
        impl SubmodularFunction for Plain {
            fn contains(&self, e: ElementId) -> bool {
                self.0.contains(e)
            }
            fn evaluate(&self, set: &[ElementId]) -> Result<f64> {
                self.0.evaluate(set)
            }
        }
        let cov = WeightedCoverage::new(
            [(1, 2.0), (2, 0.5), (3, 1.5)],
            [
                (ElementId(1), vec![1, 2]),
                (ElementId(2), vec![2, 3]),
                (ElementId(3), vec![3]),
            ],
        )
        .unwrap();
        let plain = Plain(cov.clone());
        for e in 1..=3 {
            for set in [vec![], vec![1], vec![2, 3], vec![1, 2, 3]] {
                let set = ids(&set);
                let a = cov.marginal(ElementId(e), &set, None).unwrap();
                let b = plain.marginal(ElementId(e), &set, None).unwrap();
                assert_eq!(a, b);
            }
        }
    }
}
