//! Per-qubit attribute data: loading, saving, and synthetic generation.
//!
//! Attribute files map qubit indices to named numeric properties. Qubits
//! present in the graph but absent from the file are considered dead:
//! they carry no values and downstream statistics must skip them along
//! with their incident couplers.

use std::collections::BTreeMap;
use std::collections::VecDeque;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::topology::QubitGraph;
use crate::{Error, Result};

/// Attribute names produced by the synthetic generator, in generation order.
pub const KNOWN_ATTRIBUTES: [&str; 4] = ["beta", "b", "lambda", "eta"];

/// Jitter amplitude of the smooth synthetic model, small against the unit
/// degree spacing it perturbs.
pub const SMOOTH_JITTER: f64 = 0.05;

/// Named per-qubit values, keyed attribute-first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttributeSet {
    by_attr: BTreeMap<String, BTreeMap<u32, f64>>,
}

impl AttributeSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets one value, creating the attribute on first use.
    pub fn insert(&mut self, attr: &str, qubit: u32, value: f64) {
        self.by_attr.entry(attr.to_string()).or_default().insert(qubit, value);
    }

    /// Values of one attribute, keyed by qubit.
    pub fn attribute(&self, name: &str) -> Option<&BTreeMap<u32, f64>> {
        self.by_attr.get(name)
    }

    /// Attribute names, sorted.
    pub fn names(&self) -> Vec<&str> {
        self.by_attr.keys().map(String::as_str).collect()
    }

    /// Qubits that carry at least one value, sorted.
    pub fn live_qubits(&self) -> Vec<u32> {
        let mut set: Vec<u32> = self.by_attr.values().flat_map(|m| m.keys().copied()).collect();
        set.sort_unstable();
        set.dedup();
        set
    }

    pub fn is_empty(&self) -> bool {
        self.by_attr.is_empty()
    }

    /// Serializes to the qubit-first JSON schema.
    pub fn to_json_string(&self) -> String {
        let mut qubits: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (attr, values) in &self.by_attr {
            for (&qubit, &value) in values {
                qubits.entry(qubit.to_string()).or_default().insert(attr.clone(), value);
            }
        }
        let file = AttributeFile { qubits };
        let mut s =
            serde_json::to_string_pretty(&file).expect("attribute serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct AttributeFile {
    qubits: BTreeMap<String, BTreeMap<String, f64>>,
}

/// Parses an attribute document and validates it against the graph: qubit
/// keys must be valid indices of live graph nodes and every value must be
/// finite. Graph nodes missing from the document are dead, not an error.
pub fn load_attributes_str(s: &str, g: &QubitGraph) -> Result<AttributeSet> {
    let file: AttributeFile = serde_json::from_str(s)?;
    let mut out = AttributeSet::new();
    for (key, attrs) in &file.qubits {
        let qubit: u32 = key.parse().map_err(|_| {
            Error::Format(format!("bad qubit key {key:?}: expected a qubit index"))
        })?;
        if !g.contains_node(qubit) {
            return Err(Error::ForeignQubit { qubit });
        }
        for (attr, &value) in attrs {
            if !value.is_finite() {
                return Err(Error::NonFiniteAttribute { attr: attr.clone(), qubit });
            }
            out.insert(attr, qubit, value);
        }
    }
    Ok(out)
}

/// Reads and validates an attribute file. See [`load_attributes_str`].
pub fn load_attributes(path: &Path, g: &QubitGraph) -> Result<AttributeSet> {
    let s = std::fs::read_to_string(path)?;
    load_attributes_str(&s, g)
}

/// Synthetic attribute families with known spatial structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticModel {
    /// Independent standard normal draws per qubit: no spatial structure.
    Iid,
    /// Neighbor count plus [`SMOOTH_JITTER`] times a standard normal draw:
    /// neighboring values tend to agree wherever degree clusters.
    Smooth,
    /// Alternating +1/-1 by breadth-first two-coloring: neighboring values
    /// disagree maximally on bipartite graphs. Uses no randomness.
    Anti,
}

/// Generates one value per live qubit for each of [`KNOWN_ATTRIBUTES`],
/// deterministically in `seed`. Draws are consumed attribute by attribute
/// in declaration order and qubit by qubit in ascending index order, so a
/// given `(graph, model, seed)` triple always produces identical files.
pub fn synthesize_attributes(
    g: &QubitGraph,
    model: SyntheticModel,
    seed: u64,
) -> Result<AttributeSet> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degrees = g.degrees();
    let coloring = two_coloring(g);
    let mut out = AttributeSet::new();
    for attr in KNOWN_ATTRIBUTES {
        for &n in g.nodes() {
            let value = match model {
                SyntheticModel::Iid => StandardNormal.sample(&mut rng),
                SyntheticModel::Smooth => {
                    let jitter: f64 = StandardNormal.sample(&mut rng);
                    degrees[&n] as f64 + SMOOTH_JITTER * jitter
                }
                SyntheticModel::Anti => coloring[&n],
            };
            out.insert(attr, n, value);
        }
    }
    Ok(out)
}

/// Breadth-first two-coloring with values +1/-1, started from the smallest
/// node of each component. Exact alternation on bipartite graphs; on odd
/// cycles the first-visit color simply wins.
fn two_coloring(g: &QubitGraph) -> BTreeMap<u32, f64> {
    let mut color = BTreeMap::new();
    for &start in g.nodes() {
        if color.contains_key(&start) {
            continue;
        }
        color.insert(start, 1.0);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            let mine = color[&n];
            for m in g.neighbors(n).expect("nodes come from the graph") {
                if let std::collections::btree_map::Entry::Vacant(e) = color.entry(m) {
                    e.insert(-mine);
                    queue.push_back(m);
                }
            }
        }
    }
    color
}
