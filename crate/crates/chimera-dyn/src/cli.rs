//! Argument definitions and dispatch for the chimera-dyn binary.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chimera_dyn::analysis::{
    find_peaks, geary_permutation_p, geary_report_jobs, similarity_at, Peak,
    DEFAULT_PEAK_THRESHOLD,
};
use chimera_dyn::dynamics::{
    evolve_jobs, evolve_oracle, EvolutionSpec, FidelityTrace, DEFAULT_NUM_STEPS,
};
use chimera_dyn::experiment::{run_experiment, ExperimentOptions};
use chimera_dyn::hamiltonian::{build_hamiltonian, Hamiltonian, Scaling};
use chimera_dyn::ingest::{load_attributes, synthesize_attributes, AttributeSet, SyntheticModel};
use chimera_dyn::topology::{extract_subgraph, generate_chimera_with_layout, ChimeraLayout, QubitGraph};
use chimera_dyn::{fmt_sig, Error, Result};

/// Simulates single-excitation dynamics on Chimera-style qubit networks and
/// measures spatial autocorrelation of per-qubit data over the hardware
/// graph.
#[derive(Parser)]
#[command(name = "chimera-dyn", version, max_term_width = 100)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Chimera lattice graph, optionally restricted to a subset
    /// of qubits
    Generate(GenerateArgs),
    /// Validate an attribute file against a graph and summarize coverage
    Ingest(IngestArgs),
    /// Generate synthetic attribute data with known spatial structure
    Synth(SynthArgs),
    /// Build the coupling matrix of a graph under a scaling law
    Hamiltonian(HamiltonianArgs),
    /// Evolve an excitation and write the fidelity trace
    Simulate(SimulateArgs),
    /// Locate fidelity peaks in a trace and snapshot per-coupler similarity
    Analyze(AnalyzeArgs),
    /// Geary's C spatial autocorrelation of attributes, split by edge class
    Geary(GearyArgs),
    /// Run the bundled eight-node ring study end to end
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Grid rows
    #[arg(long)]
    rows: u32,
    /// Grid columns
    #[arg(long)]
    cols: u32,
    /// Qubits per shore of each cell
    #[arg(long)]
    shore: u32,
    /// Keep only these qubits (comma separated), inducing their subgraph
    #[arg(long, value_delimiter = ',')]
    subset: Option<Vec<u32>>,
    /// Physical length of intra-cell couplers
    #[arg(long)]
    internal_length: Option<f64>,
    /// Physical length of vertical inter-cell couplers
    #[arg(long)]
    vertical_length: Option<f64>,
    /// Physical length of horizontal inter-cell couplers
    #[arg(long)]
    horizontal_length: Option<f64>,
    /// Output file (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    /// Graph file
    #[arg(long)]
    graph: PathBuf,
    /// Attribute file
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Graph file
    #[arg(long)]
    graph: PathBuf,
    /// Synthetic model
    #[arg(long, value_enum)]
    model: ModelArg,
    /// RNG seed; falls back to CHIMERA_DYN_SEED, then 0
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct HamiltonianArgs {
    /// Graph file
    #[arg(long)]
    graph: PathBuf,
    /// Coupling scaling law
    #[arg(long, value_enum, default_value_t = ScalingArg::Dipole)]
    scaling: ScalingArg,
    /// Strength of the strongest coupler
    #[arg(long, default_value_t = 1.0)]
    j0: f64,
    /// Output file (binary)
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Coupling matrix file
    #[arg(long)]
    hamiltonian: PathBuf,
    /// Native id of the source qubit
    #[arg(long)]
    source: u32,
    /// Number of samples, endpoints included
    #[arg(long, default_value_t = DEFAULT_NUM_STEPS)]
    steps: usize,
    /// Evolution window, or "auto" for one period of the weakest coupler
    #[arg(long, default_value = "auto", value_parser = parse_window)]
    tmax: WindowArg,
    /// Cross-check with the step integrator instead of the eigenbasis path
    #[arg(long)]
    oracle: bool,
    /// Worker threads for the sample loop
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output file (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Trace file from simulate
    #[arg(long)]
    trace: PathBuf,
    /// Graph the trace was simulated on
    #[arg(long)]
    graph: PathBuf,
    /// Native id of the source qubit
    #[arg(long)]
    source: u32,
    /// Which peak to snapshot similarity at
    #[arg(long, value_enum)]
    at: PeakChoice,
    /// Minimum fidelity for a local maximum to count as a peak
    #[arg(long, default_value_t = DEFAULT_PEAK_THRESHOLD)]
    threshold: f64,
    /// Output file for the similarity snapshot (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GearyArgs {
    /// Graph file
    #[arg(long)]
    graph: PathBuf,
    /// Attribute file
    #[arg(long)]
    data: PathBuf,
    /// Permutation-test rounds per attribute (0 skips the test)
    #[arg(long, default_value_t = 0)]
    permutations: usize,
    /// RNG seed for the permutation test; falls back to CHIMERA_DYN_SEED,
    /// then 0
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads across attributes
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the JSON report here as well as printing the table
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Output directory for all artifacts
    #[arg(short, long)]
    output: PathBuf,
    /// Number of samples per trace
    #[arg(long, default_value_t = DEFAULT_NUM_STEPS)]
    steps: usize,
    /// Minimum fidelity for a local maximum to count as a peak
    #[arg(long, default_value_t = DEFAULT_PEAK_THRESHOLD)]
    threshold: f64,
    /// Worker threads for the sample loops
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Iid,
    Smooth,
    Anti,
}

impl From<ModelArg> for SyntheticModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Iid => SyntheticModel::Iid,
            ModelArg::Smooth => SyntheticModel::Smooth,
            ModelArg::Anti => SyntheticModel::Anti,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ScalingArg {
    Constant,
    Dipole,
    /// Inverse-length law, 1/r
    Coulomb,
    /// Inverse-square law, 1/r^2
    InverseSquare,
}

impl From<ScalingArg> for Scaling {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::Constant => Scaling::Constant,
            ScalingArg::Dipole => Scaling::Dipole,
            ScalingArg::Coulomb => Scaling::InversePower(1.0),
            ScalingArg::InverseSquare => Scaling::InversePower(2.0),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PeakChoice {
    FirstPeak,
    MaxPeak,
}

#[derive(Clone, Copy)]
enum WindowArg {
    Auto,
    Fixed(f64),
}

fn parse_window(s: &str) -> std::result::Result<WindowArg, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(WindowArg::Auto);
    }
    s.parse::<f64>()
        .map(WindowArg::Fixed)
        .map_err(|_| format!("expected a number or \"auto\", got {s:?}"))
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("CHIMERA_DYN_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("CHIMERA_DYN_SEED is not an integer: {v:?}"))),
        Err(_) => Ok(0),
    }
}

/// Writes `content` to the file when given, otherwise to stdout.
fn emit(output: &Option<PathBuf>, content: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, content)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn describe_peak(label: &str, p: &Peak) -> String {
    format!(
        "{label}: node {} at t = {} (fidelity {})",
        p.node,
        fmt_sig(p.time),
        fmt_sig(p.fidelity)
    )
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => {
            let mut layout = ChimeraLayout::default();
            if let Some(len) = args.internal_length {
                layout.internal_length = len;
            }
            if let Some(len) = args.vertical_length {
                layout.vertical_length = len;
            }
            if let Some(len) = args.horizontal_length {
                layout.horizontal_length = len;
            }
            let mut g = generate_chimera_with_layout(args.rows, args.cols, args.shore, &layout)?;
            if let Some(subset) = &args.subset {
                g = extract_subgraph(&g, subset)?;
            }
            emit(&args.output, &g.to_json_string())
        }

        Command::Ingest(args) => {
            let g = QubitGraph::load(&args.graph)?;
            let attrs = load_attributes(&args.data, &g)?;
            let live = attrs.live_qubits();
            let dead = g.nodes().len() - live.len();
            println!(
                "qubits: {} in graph, {} live, {} dead",
                g.node_count(),
                live.len(),
                dead
            );
            for name in attrs.names() {
                let values = attrs.attribute(name).expect("listed name");
                println!("{name}: {} values", values.len());
            }
            Ok(())
        }

        Command::Synth(args) => {
            let g = QubitGraph::load(&args.graph)?;
            let seed = resolve_seed(args.seed)?;
            let attrs = synthesize_attributes(&g, args.model.into(), seed)?;
            emit(&args.output, &attrs.to_json_string())
        }

        Command::Hamiltonian(args) => {
            let g = QubitGraph::load(&args.graph)?;
            let h = build_hamiltonian(&g, args.scaling.into(), args.j0)?;
            h.save(&args.output)?;
            Ok(())
        }

        Command::Simulate(args) => {
            let h = Hamiltonian::load(&args.hamiltonian)?;
            let spec = EvolutionSpec {
                source: args.source,
                num_steps: args.steps,
                t_max: match args.tmax {
                    WindowArg::Auto => None,
                    WindowArg::Fixed(t) => Some(t),
                },
            };
            let trace = if args.oracle {
                evolve_oracle(&h, &spec)?
            } else {
                evolve_jobs(&h, &spec, args.jobs)?
            };
            match &args.output {
                Some(path) => trace.save_csv(path),
                None => trace.write_csv(std::io::stdout().lock()),
            }
        }

        Command::Analyze(args) => {
            let trace = FidelityTrace::load_csv(&args.trace)?;
            let g = QubitGraph::load(&args.graph)?;
            let peaks = find_peaks(&trace, args.source, args.threshold)?;
            // Keep the peak report away from stdout when the CSV goes there.
            let mut report = String::new();
            report.push_str(&describe_peak("first_peak", &peaks.first_peak));
            report.push('\n');
            report.push_str(&describe_peak("max_peak", &peaks.max_peak));
            report.push('\n');
            let chosen = match args.at {
                PeakChoice::FirstPeak => peaks.first_peak,
                PeakChoice::MaxPeak => peaks.max_peak,
            };
            let snap = similarity_at(&trace, &g, chosen.time)?;
            match &args.output {
                Some(path) => {
                    print!("{report}");
                    let f = std::fs::File::create(path)?;
                    snap.write_csv(std::io::BufWriter::new(f))
                }
                None => {
                    eprint!("{report}");
                    snap.write_csv(std::io::stdout().lock())
                }
            }
        }

        Command::Geary(args) => {
            let g = QubitGraph::load(&args.graph)?;
            let attrs = load_attributes(&args.data, &g)?;
            let report = geary_report_jobs(&attrs, &g, args.jobs)?;
            print!("{}", report.format_table());
            if args.permutations > 0 {
                let seed = resolve_seed(args.seed)?;
                println!("permutation test ({} rounds, seed {seed}):", args.permutations);
                for (name, p) in permutation_column(&attrs, &g, args.permutations, seed)? {
                    println!("{name}: p = {}", fmt_sig(p));
                }
            }
            if let Some(path) = &args.output {
                std::fs::write(path, report.to_json_string())?;
            }
            Ok(())
        }

        Command::Experiment(args) => {
            let opts = ExperimentOptions {
                num_steps: args.steps,
                peak_threshold: args.threshold,
                jobs: args.jobs,
            };
            let summary = run_experiment(&args.output, &opts)?;
            println!(
                "constant: {}; twins diff {}",
                describe_peak("first_peak", &summary.constant.first_peak),
                fmt_sig(summary.constant.twin_fidelity_max_diff)
            );
            println!(
                "dipole: {}; {}",
                describe_peak("first_peak", &summary.dipole.first_peak),
                describe_peak("max_peak", &summary.dipole.max_peak)
            );
            println!("wrote {} files to {}", summary.files.len(), args.output.display());
            Ok(())
        }
    }
}

fn permutation_column(
    attrs: &AttributeSet,
    g: &QubitGraph,
    permutations: usize,
    seed: u64,
) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for name in attrs.names() {
        let values = attrs.attribute(name).expect("listed name");
        let live_edges: Vec<(u32, u32)> = g
            .edges()
            .iter()
            .copied()
            .filter(|&(a, b)| values.contains_key(&a) && values.contains_key(&b))
            .collect();
        let p = geary_permutation_p(values, &live_edges, permutations, seed)?;
        out.push((name.to_string(), p));
    }
    Ok(out)
}
