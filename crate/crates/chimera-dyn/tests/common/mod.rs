// Shared generators for the integration suites. Each test binary compiles its
// own copy, so not every helper is used everywhere.
#![allow(dead_code)]

use chimera_dyn::hamiltonian::{build_hamiltonian, Hamiltonian, Scaling};
use chimera_dyn::topology::QubitGraph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected graph with `min_n..=max_n` nodes, sparse native ids, a random
/// spanning tree plus a few chords, and random edge lengths in [0.5, 2.5).
pub fn random_connected_graph<R: Rng>(rng: &mut R, min_n: usize, max_n: usize) -> QubitGraph {
    let n = rng.gen_range(min_n..=max_n);
    let mut ids: Vec<u32> = (0..(3 * n as u32)).collect();
    ids.shuffle(rng);
    ids.truncate(n);
    ids.sort_unstable();

    let mut edges = Vec::with_capacity(2 * n);
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((ids[i], ids[j]));
    }
    for _ in 0..rng.gen_range(0..=n / 2) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            edges.push((ids[a], ids[b]));
        }
    }

    let mut graph = QubitGraph::new(ids, edges).expect("generated graph is valid");
    for (a, b) in graph.edges().to_vec() {
        let len = rng.gen_range(0.5..2.5);
        graph.set_length_override(a, b, len).expect("edge exists");
    }
    graph
}

/// Random graph paired with a Hamiltonian under a randomly chosen scaling law.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    min_n: usize,
    max_n: usize,
) -> (QubitGraph, Hamiltonian) {
    let graph = random_connected_graph(rng, min_n, max_n);
    let scaling = match rng.gen_range(0..4) {
        0 => Scaling::Constant,
        1 => Scaling::Dipole,
        2 => Scaling::InversePower(1.0),
        _ => Scaling::InversePower(2.0),
    };
    let j0 = rng.gen_range(0.5..2.0);
    let h = build_hamiltonian(&graph, scaling, j0).expect("instance builds");
    (graph, h)
}

/// Random node of `graph`, for picking excitation sources.
pub fn random_node<R: Rng>(rng: &mut R, graph: &QubitGraph) -> u32 {
    graph.nodes()[rng.gen_range(0..graph.node_count())]
}
