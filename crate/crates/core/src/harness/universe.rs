//! Universe files: the element set together with the value function and
//! matroid defined over it, as JSON.
//!
//! ```json
//! {
//!   "function": { "kind": "coverage", "items": [ { "id": 1, "weight": 1.0 }, { "id": 2, "weight": 1.0 } ] },
//!   "matroid": { "kind": "uniform", "rank": 2 },
//!   "elements": [ { "id": 1, "covers": [1, 2] }, { "id": 2, "covers": [2] } ]
//! }
//! ```

use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::{
    ElementId, FacilityLocation, GraphicMatroid, Matroid, Modular, Oracles, PartitionMatroid,
    SubmodularFunction, UniformMatroid, WeightedCoverage,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionSpec {
    /// `f(S) = Σ weight(e)`
    Modular,
    /// `f(S) = Σ base^exponent(e)`
    Geometric { base: f64 },
    /// Weighted item coverage; each element lists the items it covers.
    Coverage { items: Vec<Item> },
    /// Each element is a facility at `point`.
    FacilityLocation { clients: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MatroidSpec {
    Uniform { rank: usize },
    /// Each element names its `part`.
    Partition { parts: Vec<Part> },
    /// Each element is an `edge` between two of `vertices` vertices.
    Graphic { vertices: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: u64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    pub id: u64,
    pub capacity: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ElementSpec {
    pub id: ElementId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covers: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub part: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<(usize, usize)>,
}

impl ElementSpec {
    fn new(id: u64) -> Self {
        ElementSpec {
            id: ElementId(id),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Universe {
    pub function: FunctionSpec,
    pub matroid: MatroidSpec,
    pub elements: Vec<ElementSpec>,
}

/// A universe turned into live oracles.
#[derive(Debug, Clone)]
pub struct Instance {
    pub oracles: Oracles,
    pub elements: Vec<ElementId>,
}

fn field<T: Clone>(e: &ElementSpec, value: &Option<T>, name: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::InvalidUniverse(format!("element {} has no `{name}`", e.id)))
}

impl Universe {
    pub fn ids(&self) -> Vec<ElementId> {
        self.elements.iter().map(|e| e.id).collect()
    }

    pub fn build(&self) -> Result<Instance> {
        let els = &self.elements;
        let function: Arc<dyn SubmodularFunction> = match &self.function {
            FunctionSpec::Modular => Arc::new(Modular::new(
                els.iter()
                    .map(|e| Ok((e.id, field(e, &e.weight, "weight")?)))
                    .collect::<Result<Vec<_>>>()?,
            )?),
            FunctionSpec::Geometric { base } => Arc::new(Modular::geometric(
                *base,
                els.iter()
                    .map(|e| Ok((e.id, field(e, &e.exponent, "exponent")?)))
                    .collect::<Result<Vec<_>>>()?,
            )?),
            FunctionSpec::Coverage { items } => Arc::new(WeightedCoverage::new(
                items.iter().map(|i| (i.id, i.weight)),
                els.iter()
                    .map(|e| Ok((e.id, field(e, &e.covers, "covers")?)))
                    .collect::<Result<Vec<_>>>()?,
            )?),
            FunctionSpec::FacilityLocation { clients } => Arc::new(FacilityLocation::new(
                clients,
                els.iter()
                    .map(|e| Ok((e.id, field(e, &e.point, "point")?)))
                    .collect::<Result<Vec<_>>>()?,
            )?),
        };
        let matroid: Arc<dyn Matroid> = match &self.matroid {
            MatroidSpec::Uniform { rank } => Arc::new(UniformMatroid::new(self.ids(), *rank)),
            MatroidSpec::Partition { parts } => Arc::new(PartitionMatroid::new(
                parts.iter().map(|p| (p.id, p.capacity)),
                els.iter()
                    .map(|e| Ok((e.id, field(e, &e.part, "part")?)))
                    .collect::<Result<Vec<_>>>()?,
            )?),
            MatroidSpec::Graphic { vertices } => Arc::new(GraphicMatroid::new(
                *vertices,
                els.iter()
                    .map(|e| Ok((e.id, field(e, &e.edge, "edge")?)))
                    .collect::<Result<Vec<_>>>()?,
            )?),
        };
        let mut seen = std::collections::HashSet::new();
        if let Some(e) = els.iter().find(|e| !seen.insert(e.id)) {
            return Err(Error::InvalidUniverse(format!("duplicate element {}", e.id)));
        }
        Ok(Instance {
            oracles: Oracles::new(function, matroid),
            elements: self.ids(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Modular `f(x_i) = 3^i` for `i = 1..=n` under a rank-1 uniform matroid.
    pub fn appendix_c(n: usize) -> Self {
        Universe {
            function: FunctionSpec::Geometric { base: 3.0 },
            matroid: MatroidSpec::Uniform { rank: 1 },
            elements: (1..=n as u64)
                .map(|i| ElementSpec {
                    exponent: Some(i as i32),
                    ..ElementSpec::new(i)
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionKind {
    Modular,
    Coverage,
    FacilityLocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatroidKind {
    Uniform,
    Partition,
    Graphic,
}

impl std::str::FromStr for FunctionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "modular" => Ok(FunctionKind::Modular),
            "coverage" => Ok(FunctionKind::Coverage),
            "facility-location" => Ok(FunctionKind::FacilityLocation),
            _ => Err(Error::InvalidParameter(format!("unknown function kind `{s}`"))),
        }
    }
}

impl std::str::FromStr for MatroidKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(MatroidKind::Uniform),
            "partition" => Ok(MatroidKind::Partition),
            "graphic" => Ok(MatroidKind::Graphic),
            _ => Err(Error::InvalidParameter(format!("unknown matroid kind `{s}`"))),
        }
    }
}

/// Parameters for a random universe with ids `1..=elements`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub elements: usize,
    pub function: FunctionKind,
    pub matroid: MatroidKind,
    /// Uniform rank, or the total capacity spread over partition parts.
    /// Ignored for graphic matroids, whose rank is `vertices - 1` at most.
    pub rank: usize,
}

pub fn synthesize(spec: &SynthSpec, seed: u64) -> Result<Universe> {
    if spec.elements == 0 {
        return Err(Error::InvalidParameter("a universe needs at least one element".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.elements;
    let mut elements: Vec<ElementSpec> = (1..=n as u64).map(ElementSpec::new).collect();

    let function = match spec.function {
        FunctionKind::Modular => {
            for e in &mut elements {
                e.weight = Some(f64::from(rng.gen_range(1u32..=64)));
            }
            FunctionSpec::Modular
        }
        FunctionKind::Coverage => {
            let items = (n + 2).max(4) as u64;
            for e in &mut elements {
                let size = rng.gen_range(1..=3.min(items as usize));
                let mut covers: Vec<u64> = (1..=items).collect();
                covers.shuffle(&mut rng);
                covers.truncate(size);
                covers.sort();
                e.covers = Some(covers);
            }
            FunctionSpec::Coverage {
                items: (1..=items)
                    .map(|id| Item {
                        id,
                        weight: f64::from(rng.gen_range(1u32..=8)),
                    })
                    .collect(),
            }
        }
        FunctionKind::FacilityLocation => {
            let mut point = || vec![rng.gen_range(0..=16) as f64, rng.gen_range(0..=16) as f64];
            let clients = (0..n.clamp(3, 12)).map(|_| point()).collect();
            for e in &mut elements {
                e.point = Some(point());
            }
            FunctionSpec::FacilityLocation { clients }
        }
    };

    let matroid = match spec.matroid {
        MatroidKind::Uniform => MatroidSpec::Uniform { rank: spec.rank },
        MatroidKind::Partition => {
            let parts = spec.rank.clamp(1, 3) as u64;
            let mut capacities = vec![0usize; parts as usize];
            for i in 0..spec.rank {
                capacities[i % parts as usize] += 1;
            }
            for e in &mut elements {
                e.part = Some(rng.gen_range(0..parts));
            }
            MatroidSpec::Partition {
                parts: (0..parts)
                    .map(|id| Part {
                        id,
                        capacity: capacities[id as usize],
                    })
                    .collect(),
            }
        }
        MatroidKind::Graphic => {
            let vertices = (spec.rank + 1).max(2);
            for e in &mut elements {
                let u = rng.gen_range(0..vertices);
                let v = (u + rng.gen_range(1..vertices)) % vertices;
                e.edge = Some((u.min(v), u.max(v)));
            }
            MatroidSpec::Graphic { vertices }
        }
    };

    Ok(Universe {
        function,
        matroid,
        elements,
    })
}
