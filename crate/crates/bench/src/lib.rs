//! Seeded fixtures shared by the benchmarks.

use std::f64::consts::TAU;

use protes_qaoa::{Graph, ParameterVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn g4() -> Graph {
    Graph::parse_edge_list("4 5\n0 1\n0 2\n0 3\n1 2\n1 3").expect("valid edge list")
}

/// Erdos-Renyi graph with edge probability 1/2 and weights in `[0.5, 2)`.
pub fn random_graph(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.5) {
                edges.push((i, j, rng.gen_range(0.5..2.0)));
            }
        }
    }
    Graph::new(n, edges).expect("valid graph")
}

pub fn random_theta(p: usize, seed: u64) -> ParameterVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut angles = || (0..p).map(|_| rng.gen_range(0.0..TAU)).collect::<Vec<_>>();
    let gammas = angles();
    let betas = angles();
    ParameterVector::new(gammas, betas).expect("p >= 1")
}
