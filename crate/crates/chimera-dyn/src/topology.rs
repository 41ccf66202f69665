//! Chimera-style qubit graphs: generation, classification, sub-selection,
//! and a JSON interchange format.
//!
//! A Chimera lattice is a `rows x cols` grid of complete bipartite unit
//! cells with `shore` qubits on each side. Qubit `k` of cell `(i, j)` has
//! native index `(i * cols + j) * 2 * shore + k`; indices `k < shore` form
//! the left shore, the rest the right shore. Left shores chain vertically
//! between row neighbors, right shores chain horizontally between column
//! neighbors, so every edge is either internal to a cell or external
//! between cells.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Couplers inside one unit cell versus couplers between cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeClass {
    Internal,
    External,
}

impl fmt::Display for EdgeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeClass::Internal => write!(f, "internal"),
            EdgeClass::External => write!(f, "external"),
        }
    }
}

/// Ratio of the weakest inter-cell coupling to the intra-cell coupling in
/// the default calibration. The default vertical link length is derived
/// from it so that a cubed inverse-length law reproduces the ratio exactly.
pub const WEAK_COUPLING_RATIO: f64 = 0.11;

/// Default physical length assigned to intra-cell couplers.
pub const DEFAULT_INTERNAL_LENGTH: f64 = 1.0;

/// Default physical length of horizontal inter-cell couplers.
pub const DEFAULT_HORIZONTAL_LENGTH: f64 = 1.8;

/// Default physical length of vertical inter-cell couplers:
/// `(1 / WEAK_COUPLING_RATIO)^(1/3)`, about 2.087.
pub fn default_vertical_length() -> f64 {
    (DEFAULT_INTERNAL_LENGTH / WEAK_COUPLING_RATIO).cbrt()
}

/// Geometry knobs for [`generate_chimera_with_layout`].
///
/// The drawing coordinates place cell `(i, j)` at
/// `(j * cell_width, -i * cell_height)` with shores laid out as two vertical
/// columns. A flat drawing cannot give every intra-cell coupler the same
/// physical length, so generation also records a per-edge length override
/// by class (`internal_length`, `vertical_length`, `horizontal_length`);
/// those lengths, not the drawing, are what coupling laws consume.
#[derive(Debug, Clone)]
pub struct ChimeraLayout {
    /// Vertical distance between adjacent qubits of one shore column.
    pub vertical_spacing: f64,
    /// Horizontal distance between the two shore columns of a cell.
    pub shore_offset: f64,
    /// Extra horizontal gap between neighboring cells.
    pub cell_gap_x: f64,
    /// Extra vertical gap between neighboring cells.
    pub cell_gap_y: f64,
    /// Physical length recorded for intra-cell couplers.
    pub internal_length: f64,
    /// Physical length recorded for vertical inter-cell couplers.
    pub vertical_length: f64,
    /// Physical length recorded for horizontal inter-cell couplers.
    pub horizontal_length: f64,
}

impl Default for ChimeraLayout {
    fn default() -> Self {
        ChimeraLayout {
            vertical_spacing: 1.0,
            shore_offset: 1.0,
            cell_gap_x: 2.0,
            cell_gap_y: 2.0,
            internal_length: DEFAULT_INTERNAL_LENGTH,
            vertical_length: default_vertical_length(),
            horizontal_length: DEFAULT_HORIZONTAL_LENGTH,
        }
    }
}

/// An undirected qubit network with optional drawing coordinates, unit-cell
/// assignments, and per-edge physical length overrides.
///
/// Nodes are kept sorted and unique; edges are stored with the smaller
/// endpoint first, sorted and unique, and never loop back to their own
/// endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitGraph {
    nodes: Vec<u32>,
    edges: Vec<(u32, u32)>,
    coords: BTreeMap<u32, (f64, f64)>,
    cells: BTreeMap<u32, u32>,
    length_overrides: BTreeMap<(u32, u32), f64>,
}

impl QubitGraph {
    /// Builds a bare graph from node and edge lists, validating that nodes
    /// are unique, edges are loop-free, and every endpoint exists. Edge
    /// orientation and duplicates are normalized away.
    pub fn new(nodes: Vec<u32>, edges: Vec<(u32, u32)>) -> Result<Self> {
        Self::with_metadata(nodes, edges, BTreeMap::new(), BTreeMap::new(), BTreeMap::new())
    }

    /// Like [`QubitGraph::new`], attaching coordinates, cell assignments,
    /// and length overrides. Metadata may cover a subset of the graph but
    /// must not reference nodes or edges outside it.
    pub fn with_metadata(
        mut nodes: Vec<u32>,
        edges: Vec<(u32, u32)>,
        coords: BTreeMap<u32, (f64, f64)>,
        cells: BTreeMap<u32, u32>,
        length_overrides: BTreeMap<(u32, u32), f64>,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptyGraph);
        }
        nodes.sort_unstable();
        for w in nodes.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateNode(w[0]));
            }
        }

        let mut normalized = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if nodes.binary_search(&e.0).is_err() || nodes.binary_search(&e.1).is_err() {
                return Err(Error::DanglingEdge(a, b));
            }
            normalized.insert(e);
        }
        let edges: Vec<(u32, u32)> = normalized.into_iter().collect();

        for &n in coords.keys().chain(cells.keys()) {
            if nodes.binary_search(&n).is_err() {
                return Err(Error::Format(format!(
                    "metadata references node {n}, which is not in the graph"
                )));
            }
        }
        let mut overrides = BTreeMap::new();
        for ((a, b), len) in length_overrides {
            let e = (a.min(b), a.max(b));
            if edges.binary_search(&e).is_err() {
                return Err(Error::Format(format!(
                    "length override references edge ({a}, {b}), which is not in the graph"
                )));
            }
            if !(len.is_finite() && len > 0.0) {
                return Err(Error::BadEdgeLength { a: e.0, b: e.1, len });
            }
            overrides.insert(e, len);
        }

        Ok(QubitGraph { nodes, edges, coords, cells, length_overrides: overrides })
    }

    /// Native node indices, ascending.
    pub fn nodes(&self) -> &[u32] {
        &self.nodes
    }

    /// Normalized edges `(min, max)`, ascending.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_node(&self, n: u32) -> bool {
        self.nodes.binary_search(&n).is_ok()
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Drawing coordinate of a node, if one was recorded.
    pub fn coord(&self, n: u32) -> Option<(f64, f64)> {
        self.coords.get(&n).copied()
    }

    /// Unit-cell index of a node, if one was recorded.
    pub fn cell(&self, n: u32) -> Option<u32> {
        self.cells.get(&n).copied()
    }

    /// Recorded physical length of an edge, if overridden.
    pub fn length_override(&self, a: u32, b: u32) -> Option<f64> {
        self.length_overrides.get(&(a.min(b), a.max(b))).copied()
    }

    /// Overrides the physical length of an existing edge.
    pub fn set_length_override(&mut self, a: u32, b: u32, len: f64) -> Result<()> {
        let e = (a.min(b), a.max(b));
        if self.edges.binary_search(&e).is_err() {
            return Err(Error::UnknownEdge(a, b));
        }
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::BadEdgeLength { a: e.0, b: e.1, len });
        }
        self.length_overrides.insert(e, len);
        Ok(())
    }

    /// Sorted neighbor list of `n`.
    pub fn neighbors(&self, n: u32) -> Result<Vec<u32>> {
        if !self.contains_node(n) {
            return Err(Error::UnknownNode(n));
        }
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            if a == n {
                out.push(b);
            } else if b == n {
                out.push(a);
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Degree of every node, isolated nodes included.
    pub fn degrees(&self) -> BTreeMap<u32, usize> {
        let mut deg: BTreeMap<u32, usize> = self.nodes.iter().map(|&n| (n, 0)).collect();
        for &(a, b) in &self.edges {
            *deg.get_mut(&a).unwrap() += 1;
            *deg.get_mut(&b).unwrap() += 1;
        }
        deg
    }

    /// Serializes to the JSON interchange schema.
    pub fn to_json_string(&self) -> String {
        let file = GraphFile {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
            coords: self.coords.iter().map(|(n, &xy)| (n.to_string(), xy)).collect(),
            cells: self.cells.iter().map(|(n, &c)| (n.to_string(), c)).collect(),
            length_overrides: self
                .length_overrides
                .iter()
                .map(|(&(a, b), &len)| (format!("{a}-{b}"), len))
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("graph serialization cannot fail");
        s.push('\n');
        s
    }

    /// Parses the JSON interchange schema, validating every reference.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(s)?;
        let mut coords = BTreeMap::new();
        for (key, xy) in file.coords {
            coords.insert(parse_node_key(&key)?, xy);
        }
        let mut cells = BTreeMap::new();
        for (key, c) in file.cells {
            cells.insert(parse_node_key(&key)?, c);
        }
        let mut overrides = BTreeMap::new();
        for (key, len) in file.length_overrides {
            overrides.insert(parse_edge_key(&key)?, len);
        }
        Self::with_metadata(file.nodes, file.edges, coords, cells, overrides)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json_str(&s)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<u32>,
    edges: Vec<(u32, u32)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    coords: BTreeMap<String, (f64, f64)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    cells: BTreeMap<String, u32>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    length_overrides: BTreeMap<String, f64>,
}

fn parse_node_key(key: &str) -> Result<u32> {
    key.parse()
        .map_err(|_| Error::Format(format!("bad node key {key:?}: expected a qubit index")))
}

fn parse_edge_key(key: &str) -> Result<(u32, u32)> {
    let (a, b) = key
        .split_once('-')
        .ok_or_else(|| Error::Format(format!("bad edge key {key:?}: expected \"a-b\"")))?;
    let a = parse_node_key(a)?;
    let b = parse_node_key(b)?;
    if a == b {
        return Err(Error::SelfLoop(a));
    }
    Ok((a.min(b), a.max(b)))
}

/// Generates a Chimera lattice with the default layout.
pub fn generate_chimera(rows: u32, cols: u32, shore: u32) -> Result<QubitGraph> {
    generate_chimera_with_layout(rows, cols, shore, &ChimeraLayout::default())
}

/// Generates a `rows x cols` Chimera lattice of `K_{shore,shore}` cells.
///
/// Produces `rows * cols * 2 * shore` nodes and
/// `rows * cols * shore^2 + (rows - 1) * cols * shore + rows * (cols - 1) * shore`
/// edges, each annotated with a physical length from the layout.
pub fn generate_chimera_with_layout(
    rows: u32,
    cols: u32,
    shore: u32,
    layout: &ChimeraLayout,
) -> Result<QubitGraph> {
    if rows == 0 || cols == 0 || shore == 0 {
        return Err(Error::BadChimeraShape);
    }
    let total = rows as u64 * cols as u64 * 2 * shore as u64;
    if total > u32::MAX as u64 {
        return Err(Error::IndexOverflow);
    }

    let cell_width = layout.shore_offset + layout.cell_gap_x;
    let cell_height = (shore - 1) as f64 * layout.vertical_spacing + layout.cell_gap_y;
    let index = |i: u32, j: u32, k: u32| (i * cols + j) * 2 * shore + k;

    let mut nodes = Vec::with_capacity(total as usize);
    let mut coords = BTreeMap::new();
    let mut cells = BTreeMap::new();
    let mut edges = Vec::new();
    let mut overrides = BTreeMap::new();
    let mut add_edge = |edges: &mut Vec<(u32, u32)>, a: u32, b: u32, len: f64| {
        let e = (a.min(b), a.max(b));
        edges.push(e);
        overrides.insert(e, len);
    };

    for i in 0..rows {
        for j in 0..cols {
            let origin = (j as f64 * cell_width, -(i as f64) * cell_height);
            for k in 0..2 * shore {
                let n = index(i, j, k);
                nodes.push(n);
                cells.insert(n, i * cols + j);
                let (col, row_in_shore) = if k < shore {
                    (0.0, k)
                } else {
                    (layout.shore_offset, k - shore)
                };
                coords.insert(
                    n,
                    (
                        origin.0 + col,
                        origin.1 - row_in_shore as f64 * layout.vertical_spacing,
                    ),
                );
            }
            // Complete bipartite couplers between the two shores.
            for kl in 0..shore {
                for kr in shore..2 * shore {
                    add_edge(&mut edges, index(i, j, kl), index(i, j, kr), layout.internal_length);
                }
            }
            // Left shore chains to the cell below, right shore to the right.
            if i + 1 < rows {
                for k in 0..shore {
                    add_edge(
                        &mut edges,
                        index(i, j, k),
                        index(i + 1, j, k),
                        layout.vertical_length,
                    );
                }
            }
            if j + 1 < cols {
                for k in shore..2 * shore {
                    add_edge(
                        &mut edges,
                        index(i, j, k),
                        index(i, j + 1, k),
                        layout.horizontal_length,
                    );
                }
            }
        }
    }

    QubitGraph::with_metadata(nodes, edges, coords, cells, overrides)
}

/// Classifies an edge as intra-cell or inter-cell from the recorded cell
/// assignments.
pub fn classify_edge(g: &QubitGraph, a: u32, b: u32) -> Result<EdgeClass> {
    if !g.has_edge(a, b) {
        return Err(Error::UnknownEdge(a, b));
    }
    let cell_of = |n: u32| {
        g.cell(n)
            .ok_or_else(|| Error::Format(format!("node {n} has no unit-cell assignment")))
    };
    Ok(if cell_of(a)? == cell_of(b)? {
        EdgeClass::Internal
    } else {
        EdgeClass::External
    })
}

/// Induced subgraph on `keep`, carrying metadata along. Every requested
/// node must exist; duplicates in `keep` are tolerated.
pub fn extract_subgraph(g: &QubitGraph, keep: &[u32]) -> Result<QubitGraph> {
    let keep: BTreeSet<u32> = keep.iter().copied().collect();
    for &n in &keep {
        if !g.contains_node(n) {
            return Err(Error::UnknownNode(n));
        }
    }
    if keep.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let nodes: Vec<u32> = keep.iter().copied().collect();
    let edges: Vec<(u32, u32)> = g
        .edges
        .iter()
        .copied()
        .filter(|&(a, b)| keep.contains(&a) && keep.contains(&b))
        .collect();
    let coords = g.coords.iter().filter(|(n, _)| keep.contains(n)).map(|(&n, &c)| (n, c)).collect();
    let cells = g.cells.iter().filter(|(n, _)| keep.contains(n)).map(|(&n, &c)| (n, c)).collect();
    let overrides = g
        .length_overrides
        .iter()
        .filter(|(&(a, b), _)| keep.contains(&a) && keep.contains(&b))
        .map(|(&e, &len)| (e, len))
        .collect();
    QubitGraph::with_metadata(nodes, edges, coords, cells, overrides)
}

/// Physical length of every edge: the recorded override when present,
/// otherwise the Euclidean distance between drawing coordinates.
pub fn edge_lengths(g: &QubitGraph) -> Result<BTreeMap<(u32, u32), f64>> {
    let mut out = BTreeMap::new();
    for &(a, b) in g.edges() {
        let len = match g.length_override(a, b) {
            Some(len) => len,
            None => {
                let pa = g.coord(a).ok_or_else(|| {
                    Error::Format(format!(
                        "edge ({a}, {b}) has no length override and node {a} has no coordinates"
                    ))
                })?;
                let pb = g.coord(b).ok_or_else(|| {
                    Error::Format(format!(
                        "edge ({a}, {b}) has no length override and node {b} has no coordinates"
                    ))
                })?;
                ((pa.0 - pb.0).powi(2) + (pa.1 - pb.1).powi(2)).sqrt()
            }
        };
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::BadEdgeLength { a, b, len });
        }
        out.insert((a, b), len);
    }
    Ok(out)
}
