//! One-excitation coupling Hamiltonians.
//!
//! With a single excitation hopping on a qubit network, the full many-body
//! problem collapses to the network itself: the Hamiltonian is just the
//! weighted adjacency matrix of the graph (zero on-site terms), indexed by
//! dense row numbers that map back to native qubit ids.

use std::io::{Read, Write};
use std::path::Path;

use crate::linalg::DenseMatrix;
use crate::topology::{edge_lengths, QubitGraph};
use crate::{Error, Result};

/// File magic of the binary matrix format.
pub const MAGIC: &[u8; 5] = b"CHDM1";

/// How coupler strength depends on physical coupler length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling {
    /// Every coupler gets strength `j0` regardless of length.
    Constant,
    /// Strength falls off with the cube of length, like aligned dipoles:
    /// `j0 * (len_min / len)^3`, self-normalized so the shortest coupler
    /// gets exactly `j0`.
    Dipole,
    /// Generalized inverse-power law `j0 * (len_min / len)^p`. Exponent 3
    /// recovers [`Scaling::Dipole`], 1 is Coulomb-like, 0 recovers
    /// [`Scaling::Constant`].
    InversePower(f64),
}

impl Scaling {
    fn exponent(self) -> Option<f64> {
        match self {
            Scaling::Constant => None,
            Scaling::Dipole => Some(3.0),
            Scaling::InversePower(p) => Some(p),
        }
    }
}

/// Symmetric coupling matrix over the live qubits of a graph, with the
/// dense-row-to-native-id mapping needed to label results.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    matrix: DenseMatrix,
    nodes: Vec<u32>,
}

impl Hamiltonian {
    /// Dimension of the dense matrix.
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// Native qubit id of each dense row, ascending.
    pub fn nodes(&self) -> &[u32] {
        &self.nodes
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// Dense row of a native qubit id.
    pub fn dense_index(&self, native: u32) -> Result<usize> {
        self.nodes.binary_search(&native).map_err(|_| Error::UnknownNode(native))
    }

    /// Native qubit id of a dense row.
    pub fn native(&self, dense: usize) -> Result<u32> {
        self.nodes.get(dense).copied().ok_or(Error::Format(format!(
            "dense index {dense} out of range for dimension {}",
            self.nodes.len()
        )))
    }

    /// Coupling between two native qubit ids.
    pub fn coupling(&self, a: u32, b: u32) -> Result<f64> {
        Ok(self.matrix.get(self.dense_index(a)?, self.dense_index(b)?))
    }

    /// Weakest nonzero coupling magnitude, if any coupler exists.
    pub fn j_min(&self) -> Option<f64> {
        let mut min: Option<f64> = None;
        let n = self.n();
        for i in 0..n {
            for j in (i + 1)..n {
                let x = self.matrix.get(i, j).abs();
                if x > 0.0 && min.is_none_or(|m| x < m) {
                    min = Some(x);
                }
            }
        }
        min
    }

    /// Natural evolution window: one period of the weakest coupler,
    /// `1 / j_min`. Fails on edgeless graphs where no scale exists.
    pub fn default_window(&self) -> Result<f64> {
        self.j_min().map(|j| 1.0 / j).ok_or(Error::NoEdges)
    }

    /// Writes the binary format: magic, u32 dimension, row-major f64
    /// entries, then the native id of each dense row, all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        let n = self.n() as u32;
        w.write_all(&n.to_le_bytes())?;
        for &x in self.matrix.as_slice() {
            w.write_all(&x.to_le_bytes())?;
        }
        w.write_all(&n.to_le_bytes())?;
        for &node in &self.nodes {
            w.write_all(&node.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads the binary format. The native-id block is optional for
    /// compatibility with bare matrix dumps; without it, dense rows are
    /// their own labels.
    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "bad magic {:?}: not a coupling matrix file",
                String::from_utf8_lossy(&magic)
            )));
        }
        let n = read_u32(&mut r)? as usize;
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if n > 1 << 16 {
            return Err(Error::Format(format!("implausible matrix dimension {n}")));
        }
        let mut data = vec![0.0f64; n * n];
        for x in &mut data {
            let mut buf = [0u8; 8];
            r.read_exact(&mut buf)?;
            *x = f64::from_le_bytes(buf);
        }
        let matrix = DenseMatrix::from_row_major(n, data)?;

        let mut probe = [0u8; 4];
        let nodes = match r.read_exact(&mut probe) {
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
                (0..n as u32).collect::<Vec<u32>>()
            }
            Err(e) => return Err(e.into()),
            Ok(()) => {
                let count = u32::from_le_bytes(probe) as usize;
                if count != n {
                    return Err(Error::Format(format!(
                        "node label block has {count} entries for a dimension-{n} matrix"
                    )));
                }
                let mut nodes = Vec::with_capacity(n);
                for _ in 0..n {
                    nodes.push(read_u32(&mut r)?);
                }
                if !nodes.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::Format(
                        "node labels must be strictly increasing".to_string(),
                    ));
                }
                nodes
            }
        };
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::Format("trailing bytes after matrix data".to_string()));
        }
        Ok(Hamiltonian { matrix, nodes })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        self.write_binary(&mut f)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_binary(std::io::BufReader::new(f))
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

/// Builds the coupling matrix of a graph under a scaling law.
///
/// `j0` is the strength of the strongest (shortest) coupler and must be
/// positive. Length-dependent scalings read per-edge physical lengths from
/// the graph; [`Scaling::Constant`] needs none.
pub fn build_hamiltonian(g: &QubitGraph, scaling: Scaling, j0: f64) -> Result<Hamiltonian> {
    if !(j0.is_finite() && j0 > 0.0) {
        return Err(Error::BadCoupling(j0));
    }
    if let Some(p) = scaling.exponent() {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::BadExponent(p));
        }
    }

    let nodes: Vec<u32> = g.nodes().to_vec();
    let index = |native: u32| nodes.binary_search(&native).expect("edge endpoints are nodes");
    let mut matrix = DenseMatrix::zeros(nodes.len());

    match scaling.exponent() {
        None => {
            for &(a, b) in g.edges() {
                let (i, j) = (index(a), index(b));
                matrix.set(i, j, j0);
                matrix.set(j, i, j0);
            }
        }
        Some(p) => {
            let lengths = edge_lengths(g)?;
            let min_len = lengths.values().copied().fold(f64::INFINITY, f64::min);
            for (&(a, b), &len) in &lengths {
                let coupling = j0 * (min_len / len).powf(p);
                let (i, j) = (index(a), index(b));
                matrix.set(i, j, coupling);
                matrix.set(j, i, coupling);
            }
        }
    }

    Ok(Hamiltonian { matrix, nodes })
}
