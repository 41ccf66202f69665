// End-to-end checks of the chimera-dyn binary: pipeline composition, output
// determinism, seed resolution, and the exit-code contract (0 success,
// 2 usage, 3 bad input, 4 numerical failure).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const RING_SUBSET: &str = "3,7,11,15,19,23,27,31";

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chimera-dyn"));
    // Tests control the seed fallback explicitly; scrub any ambient value.
    cmd.env_remove("CHIMERA_DYN_SEED");
    cmd
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "expected success for {args:?}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_code(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().expect("binary runs");
    let code = out.status.code().expect("no signal");
    (code, String::from_utf8_lossy(&out.stderr).into_owned())
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn ring_graph_file(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("ring.json");
    run_ok(&[
        "generate",
        "--rows",
        "2",
        "--cols",
        "2",
        "--shore",
        "4",
        "--subset",
        RING_SUBSET,
        "-o",
        path_str(&path),
    ]);
    path
}

#[test]
fn pipeline_from_lattice_to_similarity_and_statistics() {
    let dir = TempDir::new().unwrap();
    let graph = ring_graph_file(&dir);

    let ham = dir.path().join("ring.chdm");
    run_ok(&[
        "hamiltonian",
        "--graph",
        path_str(&graph),
        "--scaling",
        "dipole",
        "-o",
        path_str(&ham),
    ]);

    let trace = dir.path().join("trace.csv");
    run_ok(&[
        "simulate",
        "--hamiltonian",
        path_str(&ham),
        "--source",
        "3",
        "-o",
        path_str(&trace),
    ]);
    let csv = std::fs::read_to_string(&trace).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "t,f_3,f_7,f_11,f_15,f_19,f_23,f_27,f_31,total");
    assert_eq!(csv.lines().count(), 2002, "2001 samples plus header");

    // Peak report goes to stdout because the similarity CSV goes to a file.
    let sim = dir.path().join("sim.csv");
    let out = run_ok(&[
        "analyze",
        "--trace",
        path_str(&trace),
        "--graph",
        path_str(&graph),
        "--source",
        "3",
        "--at",
        "max-peak",
        "-o",
        path_str(&sim),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("first_peak: node 19"), "stdout was: {stdout}");
    assert!(stdout.contains("max_peak: node 7"), "stdout was: {stdout}");
    let sim_csv = std::fs::read_to_string(&sim).unwrap();
    assert_eq!(sim_csv.lines().next().unwrap(), "i,j,rel_length,sim");
    assert_eq!(sim_csv.lines().count(), 9, "8 couplers plus header");

    let data = dir.path().join("attrs.json");
    run_ok(&[
        "synth",
        "--graph",
        path_str(&graph),
        "--model",
        "smooth",
        "--seed",
        "7",
        "-o",
        path_str(&data),
    ]);
    let out = run_ok(&["ingest", "--graph", path_str(&graph), "--data", path_str(&data)]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("qubits: 8 in graph, 8 live, 0 dead"), "stdout was: {stdout}");
    assert!(stdout.contains("beta: 8 values"), "stdout was: {stdout}");

    let report = dir.path().join("geary.json");
    let out = run_ok(&[
        "geary",
        "--graph",
        path_str(&graph),
        "--data",
        path_str(&data),
        "-o",
        path_str(&report),
    ]);
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.starts_with("attribute"), "table was: {table}");
    for name in ["beta", "b", "eta", "lambda"] {
        assert!(table.contains(name), "missing {name} row in: {table}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json.as_object().unwrap().len(), 4);
    assert!(json["beta"]["edges"]["all"].as_u64().unwrap() == 8);
}

#[test]
fn simulate_honors_window_jobs_and_oracle_flags() {
    let dir = TempDir::new().unwrap();
    let graph = ring_graph_file(&dir);
    let ham = dir.path().join("ring.chdm");
    run_ok(&["hamiltonian", "--graph", path_str(&graph), "-o", path_str(&ham)]);

    let base = [
        "simulate",
        "--hamiltonian",
        path_str(&ham),
        "--source",
        "3",
        "--steps",
        "51",
        "--tmax",
        "2.5",
    ];

    let serial = run_ok(&base);
    let text = String::from_utf8_lossy(&serial.stdout).into_owned();
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("2.50000000000e0,"), "last row was: {last}");
    let first = text.lines().nth(1).unwrap();
    assert!(
        first.starts_with("0.00000000000e0,1.00000000000e0,"),
        "excitation should start at the source: {first}"
    );

    // The sample loop is deterministic regardless of worker count.
    let parallel = run_ok(&{
        let mut v = base.to_vec();
        v.extend(["--jobs", "4"]);
        v
    });
    assert_eq!(serial.stdout, parallel.stdout);

    // The step integrator agrees with the eigenbasis path to printing
    // precision except for accumulated last-digit noise.
    let oracle = run_ok(&{
        let mut v = base.to_vec();
        v.push("--oracle");
        v
    });
    let oracle_text = String::from_utf8_lossy(&oracle.stdout);
    assert_eq!(oracle_text.lines().next(), text.lines().next());
    for (a, b) in text.lines().skip(1).zip(oracle_text.lines().skip(1)) {
        for (x, y) in a.split(',').zip(b.split(',')) {
            let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
            assert!((x - y).abs() < 1e-9, "integrators disagree: {x} vs {y}");
        }
    }
}

#[test]
fn experiment_writes_reproducible_manifest() {
    let dir = TempDir::new().unwrap();
    let run = |sub: &str| {
        let outdir = dir.path().join(sub);
        let out = run_ok(&[
            "experiment",
            "-o",
            path_str(&outdir),
            "--steps",
            "301",
        ]);
        let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
        (outdir, stdout)
    };

    let (dir_a, stdout_a) = run("a");
    let (dir_b, stdout_b) = run("b");
    assert!(stdout_a.contains("wrote 9 files"), "stdout was: {stdout_a}");
    // The closing line names the output directory, which differs by design.
    let summary_lines = |s: &str| -> Vec<String> {
        s.lines().filter(|l| !l.starts_with("wrote ")).map(String::from).collect()
    };
    assert_eq!(summary_lines(&stdout_a), summary_lines(&stdout_b));

    let mut names: Vec<String> = std::fs::read_dir(&dir_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "peaks_constant.json",
            "peaks_dipole.json",
            "sim_constant_first_peak.csv",
            "sim_constant_max_peak.csv",
            "sim_dipole_first_peak.csv",
            "sim_dipole_max_peak.csv",
            "summary.json",
            "trace_constant.csv",
            "trace_dipole.csv",
        ]
    );
    for name in &names {
        let a = std::fs::read(dir_a.join(name)).unwrap();
        let b = std::fs::read(dir_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir_a.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["dipole"]["first_peak"]["node"], 19);
    assert_eq!(summary["dipole"]["max_peak"]["node"], 7);
    assert_eq!(summary["dipole"]["near_perfect_transfer"], true);
    assert_eq!(summary["constant"]["twins_indistinguishable"], true);
}

#[test]
fn synth_seed_comes_from_flag_then_env_then_zero() {
    let dir = TempDir::new().unwrap();
    let graph = ring_graph_file(&dir);
    let synth = |seed_flag: Option<&str>, env: Option<&str>| -> Vec<u8> {
        let mut cmd = bin();
        cmd.args(["synth", "--graph", path_str(&graph), "--model", "iid"]);
        if let Some(seed) = seed_flag {
            cmd.args(["--seed", seed]);
        }
        if let Some(v) = env {
            cmd.env("CHIMERA_DYN_SEED", v);
        }
        let out = cmd.output().expect("binary runs");
        assert!(out.status.success());
        out.stdout
    };

    let flagged = synth(Some("42"), None);
    let from_env = synth(None, Some("42"));
    let default = synth(None, None);
    let other = synth(Some("43"), None);

    assert_eq!(flagged, from_env, "env fallback must match an explicit seed");
    assert_ne!(flagged, other, "different seeds must differ");
    assert_eq!(default, synth(Some("0"), None), "default seed is 0");
    assert!(flagged != default);

    // The flag wins over the environment.
    assert_eq!(synth(Some("42"), Some("43")), flagged);

    let mut cmd = bin();
    cmd.args(["synth", "--graph", path_str(&graph), "--model", "iid"])
        .env("CHIMERA_DYN_SEED", "not-a-number");
    let out = cmd.output().expect("binary runs");
    assert_eq!(out.status.code(), Some(3), "junk env seed is an input error");
}

#[test]
fn exit_codes_separate_usage_input_and_numerical_failures() {
    let dir = TempDir::new().unwrap();
    let graph = ring_graph_file(&dir);

    // Usage problems: clap-level and domain-level argument rejections.
    let (code, _) = run_code(&[]);
    assert_eq!(code, 2, "no subcommand is a usage error");
    let (code, _) = run_code(&["frobnicate"]);
    assert_eq!(code, 2, "unknown subcommand is a usage error");
    let (code, stderr) = run_code(&["generate", "--rows", "0", "--cols", "1", "--shore", "1"]);
    assert_eq!(code, 2, "degenerate lattice shape is a usage error: {stderr}");
    let (code, _) = run_code(&[
        "simulate",
        "--hamiltonian",
        "nowhere.chdm",
        "--source",
        "3",
        "--tmax",
        "fast",
    ]);
    assert_eq!(code, 2, "unparseable window is a usage error");

    // Input problems: missing or malformed files.
    let (code, stderr) =
        run_code(&["ingest", "--graph", path_str(&graph), "--data", "missing.json"]);
    assert_eq!(code, 3, "missing file is an input error: {stderr}");
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{\"qubits\": [1, 2, 3]}").unwrap();
    let (code, stderr) =
        run_code(&["ingest", "--graph", path_str(&graph), "--data", path_str(&garbage)]);
    assert_eq!(code, 3, "malformed attribute file is an input error: {stderr}");

    // Numerical problems: well-formed inputs with no defined answer.
    let flat = dir.path().join("flat.json");
    std::fs::write(
        &flat,
        r#"{"qubits": {"3": {"beta": 1.0}, "7": {"beta": 1.0}, "19": {"beta": 1.0}}}"#,
    )
    .unwrap();
    let (code, stderr) =
        run_code(&["geary", "--graph", path_str(&graph), "--data", path_str(&flat)]);
    assert_eq!(code, 4, "zero-variance data is a numerical error: {stderr}");
    assert!(stderr.contains("error:"), "stderr should explain: {stderr}");

    let ham = dir.path().join("ring.chdm");
    run_ok(&["hamiltonian", "--graph", path_str(&graph), "-o", path_str(&ham)]);
    let trace = dir.path().join("trace.csv");
    run_ok(&[
        "simulate",
        "--hamiltonian",
        path_str(&ham),
        "--source",
        "3",
        "-o",
        path_str(&trace),
    ]);
    let (code, stderr) = run_code(&[
        "analyze",
        "--trace",
        path_str(&trace),
        "--graph",
        path_str(&graph),
        "--source",
        "3",
        "--at",
        "first-peak",
        "--threshold",
        "0.999",
    ]);
    assert_eq!(code, 4, "no qualifying peak is a numerical error: {stderr}");
}

#[test]
fn generate_streams_a_loadable_graph_to_stdout() {
    let dir = TempDir::new().unwrap();
    let out = run_ok(&["generate", "--rows", "1", "--cols", "1", "--shore", "2"]);
    let path = dir.path().join("cell.json");
    std::fs::write(&path, &out.stdout).unwrap();

    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["nodes"].as_array().unwrap().len(), 4);
    assert_eq!(json["edges"].as_array().unwrap().len(), 4);

    let ham = dir.path().join("cell.chdm");
    run_ok(&[
        "hamiltonian",
        "--graph",
        path_str(&path),
        "--scaling",
        "constant",
        "-o",
        path_str(&ham),
    ]);
}

#[test]
fn geary_permutation_test_prints_deterministic_p_values() {
    let dir = TempDir::new().unwrap();
    let graph = dir.path().join("grid.json");
    run_ok(&[
        "generate",
        "--rows",
        "4",
        "--cols",
        "4",
        "--shore",
        "4",
        "-o",
        path_str(&graph),
    ]);
    // The alternating model colors the bipartite lattice +1/-1, the most
    // negatively autocorrelated data possible, so every permutation round
    // lands below the observed statistic and the p-value bottoms out.
    let data = dir.path().join("alternating.json");
    run_ok(&[
        "synth",
        "--graph",
        path_str(&graph),
        "--model",
        "anti",
        "--seed",
        "11",
        "-o",
        path_str(&data),
    ]);

    let args = [
        "geary",
        "--graph",
        path_str(&graph),
        "--data",
        path_str(&data),
        "--permutations",
        "99",
        "--seed",
        "5",
    ];
    let first = run_ok(&args);
    let second = run_ok(&args);
    assert_eq!(first.stdout, second.stdout, "seeded permutation test must be stable");

    let stdout = String::from_utf8_lossy(&first.stdout);
    assert!(
        stdout.contains("permutation test (99 rounds, seed 5):"),
        "stdout was: {stdout}"
    );
    for name in ["beta", "b", "eta", "lambda"] {
        assert!(
            stdout.contains(&format!("{name}: p = 2.00000000000e-2")),
            "expected the floor p-value of 2/(99+1) for {name}: {stdout}"
        );
    }
}
