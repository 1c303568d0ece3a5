#![allow(dead_code)]

use imm_core::{Graph, Model, NodeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random explicit-probability graph with `m` edges (no self-loops).
pub fn random_graph(seed: u64, n: usize, m: usize) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(NodeId, NodeId, f64)> = (0..m)
        .map(|_| {
            let u = rng.gen_range(0..n as NodeId);
            let mut v = rng.gen_range(0..n as NodeId - 1);
            if v >= u {
                v += 1;
            }
            (u, v, rng.gen_range(0.05..0.95))
        })
        .collect();
    Graph::from_edges(n, edges, Model::Explicit).unwrap()
}

pub fn random_subset(rng: &mut impl Rng, n: usize) -> Vec<NodeId> {
    (0..n as NodeId).filter(|_| rng.gen_bool(0.35)).collect()
}
