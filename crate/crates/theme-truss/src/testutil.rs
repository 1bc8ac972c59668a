//! Helpers for the test suites: random network generation and an
//! independent classical k-truss peeler used as an oracle. Not part of the
//! public API.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{DatabaseNetwork, Edge, Transaction, TransactionDatabase};

/// Bounds for random test networks.
#[derive(Clone, Copy, Debug)]
pub struct RandomNetworkSpec {
    pub max_vertices: u32,
    pub max_edges: usize,
    pub n_items: u32,
    pub max_transactions: usize,
}

impl Default for RandomNetworkSpec {
    fn default() -> Self {
        RandomNetworkSpec {
            max_vertices: 20,
            max_edges: 40,
            n_items: 6,
            max_transactions: 8,
        }
    }
}

pub fn random_network(seed: u64, spec: RandomNetworkSpec) -> DatabaseNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(4..=spec.max_vertices);
    let mut all_pairs: Vec<Edge> = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            all_pairs.push((u, v));
        }
    }
    // random subset of pairs, biased dense enough to contain triangles
    let target = spec.max_edges.min(all_pairs.len());
    let m = rng.gen_range(target / 2..=target);
    let mut edges = Vec::new();
    for &pair in &all_pairs {
        if edges.len() >= m {
            break;
        }
        if rng.gen_bool((m as f64 / all_pairs.len() as f64).min(1.0)) {
            edges.push(pair);
        }
    }
    let dbs = (0..n)
        .map(|_| {
            let h = rng.gen_range(1..=spec.max_transactions);
            TransactionDatabase::new(
                (0..h)
                    .map(|_| {
                        let mut items: Vec<u32> =
                            (0..spec.n_items).filter(|_| rng.gen_bool(0.5)).collect();
                        if items.is_empty() {
                            items.push(rng.gen_range(0..spec.n_items));
                        }
                        Transaction::new(items)
                    })
                    .collect(),
            )
        })
        .collect();
    DatabaseNetwork::from_parts(edges, dbs).expect("generated network is valid")
}

/// A network where every vertex database makes every pattern frequency 1:
/// each vertex holds the single transaction {0}. Truss behavior then depends
/// only on graph structure.
pub fn unit_frequency_network(seed: u64, n: u32, edge_prob: f64) -> DatabaseNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(edge_prob) {
                edges.push((u, v));
            }
        }
    }
    let dbs = (0..n)
        .map(|_| TransactionDatabase::new(vec![Transaction::new([0])]))
        .collect();
    DatabaseNetwork::from_parts(edges, dbs).expect("valid")
}

/// Independent classical k-truss: repeatedly delete edges supported by
/// fewer than k-2 triangles, recounting triangles from scratch each round.
pub fn classical_k_truss(edges: &[Edge], k: usize) -> Vec<Edge> {
    let mut current: Vec<Edge> = edges.to_vec();
    current.sort_unstable();
    loop {
        let mut surviving = Vec::new();
        for &(u, v) in &current {
            let mut support = 0usize;
            for &(a, b) in &current {
                // count common neighbors by scanning all edges; slow and simple
                let w = if a == u {
                    Some(b)
                } else if b == u {
                    Some(a)
                } else {
                    None
                };
                if let Some(w) = w {
                    if w != v && current.binary_search(&crate::model::edge(v, w)).is_ok() {
                        support += 1;
                    }
                }
            }
            if support + 2 >= k {
                surviving.push((u, v));
            }
        }
        if surviving.len() == current.len() {
            return current;
        }
        current = surviving;
    }
}
