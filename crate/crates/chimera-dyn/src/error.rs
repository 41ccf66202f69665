//! Crate error type. Variants are grouped by the phase that raises them so
//! the CLI can map them onto its exit codes.

use thiserror::Error;

/// Anything that can go wrong while building graphs, ingesting data,
/// simulating, or analyzing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("node {0} is not in the graph")]
    UnknownNode(u32),

    #[error("edge ({0}, {1}) is not in the graph")]
    UnknownEdge(u32, u32),

    #[error("duplicate node {0}")]
    DuplicateNode(u32),

    #[error("edge ({0}, {1}) references a missing node")]
    DanglingEdge(u32, u32),

    #[error("edge ({0}, {0}) is a self-loop")]
    SelfLoop(u32),

    #[error("chimera dimensions must be at least 1x1 with shore >= 1")]
    BadChimeraShape,

    #[error("chimera dimensions overflow the 32-bit index space")]
    IndexOverflow,

    #[error("edge ({a}, {b}) has non-positive length {len}")]
    BadEdgeLength { a: u32, b: u32, len: f64 },

    #[error("attribute {attr:?} of qubit {qubit} is not finite")]
    NonFiniteAttribute { attr: String, qubit: u32 },

    #[error("attribute file references qubit {qubit}, which is not in the graph")]
    ForeignQubit { qubit: u32 },

    #[error("coupling strength must be positive, got {0}")]
    BadCoupling(f64),

    #[error("scaling exponent must be finite and non-negative, got {0}")]
    BadExponent(f64),

    #[error("evolution window must be positive, got {0}")]
    BadWindow(f64),

    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),

    #[error("graph has no edges, so no default window exists")]
    NoEdges,

    #[error("eigensolver failed to converge: off-diagonal norm {off_diag:e} after {sweeps} sweeps")]
    NoConvergence { off_diag: f64, sweeps: usize },

    #[error("integrator step size underflowed ({0:e}); window too long for this matrix norm")]
    StepUnderflow(f64),

    #[error("peak threshold must be a positive finite fidelity, got {0}")]
    BadThreshold(f64),

    #[error("no fidelity peak at or above {threshold} in the trace")]
    NoPeak { threshold: f64 },

    #[error("snapshot time {t} lies outside the trace window [0, {t_end}]")]
    SnapshotOutOfWindow { t: f64, t_end: f64 },

    #[error("attribute values have zero variance")]
    ZeroVariance,

    #[error("need at least two valued nodes, got {0}")]
    TooFewNodes(usize),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics themselves rather than of the
    /// inputs: convergence, underflow, missing peaks, degenerate statistics.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::StepUnderflow(_)
                | Error::NoPeak { .. }
                | Error::ZeroVariance
                | Error::NoEdges
                | Error::TooFewNodes(_)
        )
    }

    /// True for malformed or unreadable input artifacts.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::Format(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::NonFiniteAttribute { .. }
                | Error::ForeignQubit { .. }
                | Error::DanglingEdge(..)
                | Error::DuplicateNode(..)
                | Error::SelfLoop(..)
        )
    }
}
