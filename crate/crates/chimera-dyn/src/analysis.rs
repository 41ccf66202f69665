//! Analysis of traces and attribute data: fidelity peaks, edge similarity
//! snapshots, and Geary's C spatial autocorrelation split by edge class.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::FidelityTrace;
use crate::fmt_sig;
use crate::ingest::AttributeSet;
use crate::topology::{classify_edge, edge_lengths, EdgeClass, QubitGraph};
use crate::{Error, Result};

/// Default minimum fidelity for a local maximum to count as a peak. Set
/// well above integrator noise but below the faintest transfer features
/// worth reporting, which sit just above half a percent in the bundled
/// eight-node study.
pub const DEFAULT_PEAK_THRESHOLD: f64 = 1e-3;

/// Fidelity below which a site is considered effectively unvisited when
/// summarizing a transfer experiment.
pub const NOTICEABLE_FIDELITY: f64 = 0.01;

/// One fidelity peak: where, when, and how high.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub node: u32,
    pub time: f64,
    pub fidelity: f64,
    pub sample: usize,
}

/// The earliest qualifying peak and the global maximum of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakReport {
    pub first_peak: Peak,
    pub max_peak: Peak,
}

/// Locates fidelity peaks across every non-source site of a trace.
///
/// A sample counts as a peak when it is a strict rise followed by a
/// non-rise (`f(s-1) < f(s) >= f(s+1)`) at or above `threshold`; the last
/// sample also counts if the trace was still rising into it. The initial
/// sample never does. `first_peak` is the earliest such sample, ties going
/// to the higher fidelity and then to the earlier column; `max_peak` is
/// the highest fidelity reached anywhere after t = 0 on a non-source site,
/// with the same tie order.
pub fn find_peaks(trace: &FidelityTrace, source: u32, threshold: f64) -> Result<PeakReport> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::BadThreshold(threshold));
    }
    let source_col = trace.column_of(source)?;
    let samples = trace.num_samples();

    let mut first: Option<Peak> = None;
    let mut max: Option<Peak> = None;
    for (col, &node) in trace.nodes().iter().enumerate() {
        if col == source_col {
            continue;
        }
        for s in 1..samples {
            let f = trace.fidelity(s, col);
            let rising = trace.fidelity(s - 1, col) < f;
            let is_peak = rising
                && f >= threshold
                && (s + 1 == samples || f >= trace.fidelity(s + 1, col));
            let candidate = Peak { node, time: trace.times()[s], fidelity: f, sample: s };
            if is_peak {
                let better = match first {
                    None => true,
                    Some(b) => {
                        (s, -f, col) < (b.sample, -b.fidelity, trace.column_of(b.node).unwrap())
                    }
                };
                if better {
                    first = Some(candidate);
                }
            }
            let higher = match max {
                None => true,
                Some(b) => {
                    (-f, s, col) < (-b.fidelity, b.sample, trace.column_of(b.node).unwrap())
                }
            };
            if higher {
                max = Some(candidate);
            }
        }
    }

    match (first, max) {
        (Some(first_peak), Some(max_peak)) => Ok(PeakReport { first_peak, max_peak }),
        _ => Err(Error::NoPeak { threshold }),
    }
}

/// Similarity of one coupler's endpoint fidelities at a snapshot time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityEntry {
    /// Smaller endpoint id.
    pub i: u32,
    /// Larger endpoint id.
    pub j: u32,
    /// Coupler length relative to the shortest coupler in the graph.
    pub rel_length: f64,
    /// `1 - |f_i - f_j|`: 1 when the endpoints hold equal populations.
    pub sim: f64,
}

/// Per-edge similarity values at one sample of a trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilaritySnapshot {
    pub time: f64,
    pub sample: usize,
    pub entries: Vec<SimilarityEntry>,
}

impl SimilaritySnapshot {
    /// Writes `i,j,rel_length,sim` rows at 12 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["i", "j", "rel_length", "sim"])?;
        for e in &self.entries {
            wtr.write_record(&[
                e.i.to_string(),
                e.j.to_string(),
                fmt_sig(e.rel_length),
                fmt_sig(e.sim),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Compares endpoint fidelities across every coupler of `g` at the sample
/// nearest to `t`, which must lie inside the trace window.
pub fn similarity_at(trace: &FidelityTrace, g: &QubitGraph, t: f64) -> Result<SimilaritySnapshot> {
    let t_end = trace.t_end();
    if !t.is_finite() || t < 0.0 || t > t_end * (1.0 + 1e-12) {
        return Err(Error::SnapshotOutOfWindow { t, t_end });
    }
    let sample = trace.nearest_sample(t);
    let lengths = edge_lengths(g)?;
    let min_len = lengths.values().copied().fold(f64::INFINITY, f64::min);
    let mut entries = Vec::with_capacity(lengths.len());
    for (&(a, b), &len) in &lengths {
        let fa = trace.fidelity_of(sample, a)?;
        let fb = trace.fidelity_of(sample, b)?;
        entries.push(SimilarityEntry {
            i: a,
            j: b,
            rel_length: len / min_len,
            sim: 1.0 - (fa - fb).abs(),
        });
    }
    Ok(SimilaritySnapshot { time: trace.times()[sample], sample, entries })
}

/// Geary's C over an explicit edge list.
///
/// `C = (n - 1) * sum_ij w_ij (x_i - x_j)^2 / (2 W sum_i (x_i - mean)^2)`
/// with unit weights both ways across each listed edge, `n` and the
/// variance taken over all of `values`. Values near 1 indicate no spatial
/// structure, below 1 neighbor agreement, above 1 neighbor disagreement.
/// Restricting `edges` to a subset while keeping `values` whole yields
/// subset statistics that average back to the full one weighted by edge
/// count.
pub fn geary_c(values: &BTreeMap<u32, f64>, edges: &[(u32, u32)]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    if edges.is_empty() {
        return Err(Error::NoEdges);
    }
    for &(a, b) in edges {
        if !values.contains_key(&a) {
            return Err(Error::UnknownNode(a));
        }
        if !values.contains_key(&b) {
            return Err(Error::UnknownNode(b));
        }
    }

    let mean = values.values().sum::<f64>() / n as f64;
    let var_sum: f64 = values.values().map(|&x| (x - mean) * (x - mean)).sum();
    let (min, max) = values
        .values()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if min == max || var_sum == 0.0 {
        return Err(Error::ZeroVariance);
    }

    // Each undirected edge carries unit weight in both directions.
    let pair_sum: f64 = 2.0
        * edges
            .iter()
            .map(|&(a, b)| {
                let d = values[&a] - values[&b];
                d * d
            })
            .sum::<f64>();
    let w_sum = 2.0 * edges.len() as f64;
    Ok((n as f64 - 1.0) * pair_sum / (2.0 * w_sum * var_sum))
}

/// Two-sided permutation p-value for the hypothesis that `values` carry no
/// spatial structure over `edges`. Relabels values across nodes uniformly
/// at random `permutations` times, deterministically in `seed`.
pub fn geary_permutation_p(
    values: &BTreeMap<u32, f64>,
    edges: &[(u32, u32)],
    permutations: usize,
    seed: u64,
) -> Result<f64> {
    let observed = geary_c(values, edges)?;
    let keys: Vec<u32> = values.keys().copied().collect();
    let mut pool: Vec<f64> = values.values().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut at_most = 0usize;
    let mut at_least = 0usize;
    for _ in 0..permutations {
        pool.shuffle(&mut rng);
        let permuted: BTreeMap<u32, f64> =
            keys.iter().copied().zip(pool.iter().copied()).collect();
        let c = geary_c(&permuted, edges)?;
        if c <= observed {
            at_most += 1;
        }
        if c >= observed {
            at_least += 1;
        }
    }
    let denom = (permutations + 1) as f64;
    let lo = (at_most + 1) as f64 / denom;
    let hi = (at_least + 1) as f64 / denom;
    Ok((2.0 * lo.min(hi)).min(1.0))
}

/// Edge tallies behind one attribute's statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeCounts {
    pub all: usize,
    pub internal: usize,
    pub external: usize,
}

/// Geary's C of one attribute over all live couplers and split by class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttributeGeary {
    pub all: f64,
    pub internal: f64,
    pub external: f64,
    /// Live qubits carrying this attribute.
    pub n: usize,
    pub edges: EdgeCounts,
}

/// Spatial autocorrelation of every attribute in a data set.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct GearyReport {
    pub attributes: BTreeMap<String, AttributeGeary>,
}

impl GearyReport {
    pub fn to_json_string(&self) -> String {
        let mut s =
            serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        s.push('\n');
        s
    }

    /// Renders an aligned text table, one attribute per row. Subset
    /// statistics further than 10 percent from the all-coupler value are
    /// starred as strongly separated.
    pub fn format_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<10} {:>6} {:>20} {:>22} {:>22} {:>22}\n",
            "attribute", "n", "edges all/int/ext", "C_all", "C_internal", "C_external"
        ));
        for (name, row) in &self.attributes {
            let strong = |sub: f64| {
                if (sub - row.all).abs() > 0.1 * row.all.abs() {
                    "*"
                } else {
                    ""
                }
            };
            out.push_str(&format!(
                "{:<10} {:>6} {:>20} {:>22} {:>22} {:>22}\n",
                name,
                row.n,
                format!("{}/{}/{}", row.edges.all, row.edges.internal, row.edges.external),
                fmt_sig(row.all),
                format!("{}{}", fmt_sig(row.internal), strong(row.internal)),
                format!("{}{}", fmt_sig(row.external), strong(row.external)),
            ));
        }
        out
    }
}

/// Computes [`GearyReport`] rows for every attribute in `attrs` over the
/// live part of `g`.
///
/// Qubits without a value for an attribute are dead for that attribute:
/// they are dropped from the node set along with every coupler touching
/// them before any statistic is computed. Each remaining coupler is
/// classified intra- or inter-cell, and subset statistics keep the full
/// live node set while restricting the weight matrix to their class.
pub fn geary_report(attrs: &AttributeSet, g: &QubitGraph) -> Result<GearyReport> {
    geary_report_jobs(attrs, g, 1)
}

/// [`geary_report`] with attributes fanned out over up to `jobs` threads.
pub fn geary_report_jobs(attrs: &AttributeSet, g: &QubitGraph, jobs: usize) -> Result<GearyReport> {
    let names = attrs.names();
    let jobs = jobs.max(1).min(names.len().max(1));

    let compute = |name: &str| -> Result<(String, AttributeGeary)> {
        let values = attrs.attribute(name).expect("name comes from the set");
        let mut live_edges = Vec::new();
        let mut internal = Vec::new();
        let mut external = Vec::new();
        for &(a, b) in g.edges() {
            if values.contains_key(&a) && values.contains_key(&b) {
                live_edges.push((a, b));
                match classify_edge(g, a, b)? {
                    EdgeClass::Internal => internal.push((a, b)),
                    EdgeClass::External => external.push((a, b)),
                }
            }
        }
        let row = AttributeGeary {
            all: geary_c(values, &live_edges)?,
            internal: geary_c(values, &internal)?,
            external: geary_c(values, &external)?,
            n: values.len(),
            edges: EdgeCounts {
                all: live_edges.len(),
                internal: internal.len(),
                external: external.len(),
            },
        };
        Ok((name.to_string(), row))
    };

    let mut attributes = BTreeMap::new();
    if jobs == 1 {
        for name in names {
            let (name, row) = compute(name)?;
            attributes.insert(name, row);
        }
    } else {
        let chunk = names.len().div_ceil(jobs);
        let compute_ref = &compute;
        let parts: Vec<Result<Vec<(String, AttributeGeary)>>> = std::thread::scope(|scope| {
            names
                .chunks(chunk)
                .map(|batch| {
                    scope.spawn(move || batch.iter().map(|name| compute_ref(name)).collect())
                })
                .collect::<Vec<_>>()
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        });
        for part in parts {
            for (name, row) in part? {
                attributes.insert(name, row);
            }
        }
    }
    Ok(GearyReport { attributes })
}
