//! Single-excitation dynamics and spatial autocorrelation on Chimera-style
//! qubit graphs.
//!
//! The crate models a network of qubits as a weighted graph, builds the
//! corresponding one-excitation coupling Hamiltonian, evolves an excitation
//! injected at a source qubit, and locates fidelity peaks at the other sites.
//! A separate analysis layer computes Geary's C spatial autocorrelation of
//! per-qubit attributes over the hardware graph, split by edge class.
//!
//! Modules are layered bottom-up: [`linalg`] (dense symmetric eigensolver),
//! [`topology`] (graph generation and classification), [`ingest`] (per-qubit
//! attribute data), [`hamiltonian`] (coupling matrices), [`dynamics`] (time
//! evolution), [`analysis`] (peaks, similarity, spatial statistics), and
//! [`experiment`] (the bundled eight-node ring study).

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod hamiltonian;
pub mod ingest;
pub mod linalg;
pub mod topology;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Formats a float with 12 significant digits, the fixed precision for CSV
/// and table output. Scientific notation keeps the digit count independent
/// of magnitude.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}
