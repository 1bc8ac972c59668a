//! Synthetic database network generator.
//!
//! Graph shape is a random spanning tree plus uniformly random extra edges
//! (a documented stand-in for the unspecified generator of the original
//! experiments). Seed vertices get uniformly sampled itemsets; every other
//! vertex samples transactions from already-built neighbor databases, with
//! each item independently rewritten to a random item with the mutation
//! probability. Per vertex of degree d, the database holds
//! ceil(e^(tx_count_coeff * d)) transactions of ceil(e^(tx_len_coeff * d))
//! items (clamped to the item universe).

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::model::{DatabaseNetwork, Edge, Transaction, TransactionDatabase};

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub n_vertices: u32,
    pub n_edges: u64,
    pub n_seeds: u32,
    pub n_items: u32,
    pub mutation_rate: f64,
    pub tx_count_coeff: f64,
    pub tx_len_coeff: f64,
    pub rng_seed: u64,
}

impl SynthConfig {
    pub fn new(n_vertices: u32, n_edges: u64, n_seeds: u32, n_items: u32, rng_seed: u64) -> Self {
        SynthConfig {
            n_vertices,
            n_edges,
            n_seeds,
            n_items,
            mutation_rate: 0.10,
            tx_count_coeff: 0.1,
            tx_len_coeff: 0.13,
            rng_seed,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("config infeasible: {0}")]
    Infeasible(String),
}

// dedicated RNG streams so reproducibility is independent of evaluation order
const STREAM_GRAPH: u64 = 1;
const STREAM_SEEDS: u64 = 2;
const STREAM_DATABASES: u64 = 3;

fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn validate(cfg: &SynthConfig) -> Result<(), SynthError> {
    let n = cfg.n_vertices as u64;
    if cfg.n_vertices == 0 {
        return Err(SynthError::Infeasible("n_vertices must be >= 1".into()));
    }
    if cfg.n_items == 0 {
        return Err(SynthError::Infeasible("n_items must be >= 1".into()));
    }
    if cfg.n_seeds == 0 || cfg.n_seeds > cfg.n_vertices {
        return Err(SynthError::Infeasible(format!(
            "n_seeds {} must be in [1, n_vertices {}]",
            cfg.n_seeds, cfg.n_vertices
        )));
    }
    if !(0.0..=1.0).contains(&cfg.mutation_rate) {
        return Err(SynthError::Infeasible(format!(
            "mutation_rate {} outside [0, 1]",
            cfg.mutation_rate
        )));
    }
    if n > 1 && cfg.n_edges < n - 1 {
        return Err(SynthError::Infeasible(format!(
            "n_edges {} below spanning-tree minimum {}",
            cfg.n_edges,
            n - 1
        )));
    }
    let max_edges = n * (n.saturating_sub(1)) / 2;
    if cfg.n_edges > max_edges {
        return Err(SynthError::Infeasible(format!(
            "n_edges {} exceeds simple-graph maximum {max_edges}",
            cfg.n_edges
        )));
    }
    Ok(())
}

fn tx_count(cfg: &SynthConfig, degree: usize) -> usize {
    (cfg.tx_count_coeff * degree as f64).exp().ceil() as usize
}

fn tx_len(cfg: &SynthConfig, degree: usize) -> usize {
    let raw = (cfg.tx_len_coeff * degree as f64).exp().ceil() as usize;
    raw.min(cfg.n_items as usize).max(1)
}

/// Distinct random items, sorted by the sampling pass; Transaction::new
/// canonicalizes.
fn random_itemset(rng: &mut ChaCha20Rng, n_items: u32, len: usize) -> Vec<u32> {
    let mut items = Vec::with_capacity(len);
    while items.len() < len {
        let candidate = rng.gen_range(0..n_items);
        if !items.contains(&candidate) {
            items.push(candidate);
        }
    }
    items
}

pub fn generate(cfg: &SynthConfig) -> Result<DatabaseNetwork, SynthError> {
    validate(cfg)?;
    let n = cfg.n_vertices;

    // graph: random spanning tree, then uniform extra edges
    let mut graph_rng = stream_rng(cfg.rng_seed, STREAM_GRAPH);
    let mut edge_set = std::collections::BTreeSet::new();
    for v in 1..n {
        let parent = graph_rng.gen_range(0..v);
        edge_set.insert((parent, v));
    }
    while (edge_set.len() as u64) < cfg.n_edges {
        let u = graph_rng.gen_range(0..n);
        let v = graph_rng.gen_range(0..n);
        if u == v {
            continue;
        }
        edge_set.insert(crate::model::edge(u, v));
    }
    let edges: Vec<Edge> = edge_set.into_iter().collect();

    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n as usize];
    for &(u, v) in &edges {
        adjacency[u as usize].push(v);
        adjacency[v as usize].push(u);
    }
    for a in &mut adjacency {
        a.sort_unstable();
    }

    // seed vertices
    let mut seed_rng = stream_rng(cfg.rng_seed, STREAM_SEEDS);
    let mut all: Vec<u32> = (0..n).collect();
    all.shuffle(&mut seed_rng);
    let mut seeds: Vec<u32> = all[..cfg.n_seeds as usize].to_vec();
    seeds.sort_unstable();

    // databases in BFS order from the seeds
    let mut db_rng = stream_rng(cfg.rng_seed, STREAM_DATABASES);
    let mut databases: Vec<Option<TransactionDatabase>> = vec![None; n as usize];
    let mut order: Vec<u32> = Vec::with_capacity(n as usize);
    let mut visited = vec![false; n as usize];
    let mut queue: VecDeque<u32> = VecDeque::new();
    for &s in &seeds {
        visited[s as usize] = true;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &adjacency[v as usize] {
            if !visited[w as usize] {
                visited[w as usize] = true;
                queue.push_back(w);
            }
        }
    }
    // vertices unreachable from any seed behave like extra seeds
    for v in 0..n {
        if !visited[v as usize] {
            order.push(v);
        }
    }

    let seed_set: Vec<bool> = {
        let mut s = vec![false; n as usize];
        for &v in &seeds {
            s[v as usize] = true;
        }
        s
    };

    for &v in &order {
        let degree = adjacency[v as usize].len();
        let count = tx_count(cfg, degree);
        let len = tx_len(cfg, degree);
        let built_neighbors: Vec<u32> = adjacency[v as usize]
            .iter()
            .copied()
            .filter(|&w| databases[w as usize].is_some())
            .collect();
        let from_scratch = seed_set[v as usize] || built_neighbors.is_empty();
        let mut txs = Vec::with_capacity(count);
        for _ in 0..count {
            let items = if from_scratch {
                random_itemset(&mut db_rng, cfg.n_items, len)
            } else {
                let &w = built_neighbors
                    .get(db_rng.gen_range(0..built_neighbors.len()))
                    .expect("nonempty");
                let source = databases[w as usize].as_ref().expect("built");
                let t = &source.transactions()[db_rng.gen_range(0..source.len())];
                let mut items: Vec<u32> = t
                    .items()
                    .iter()
                    .map(|&i| {
                        if db_rng.gen_bool(cfg.mutation_rate) {
                            db_rng.gen_range(0..cfg.n_items)
                        } else {
                            i
                        }
                    })
                    .collect();
                items.sort_unstable();
                items.dedup();
                // resize to this vertex's required transaction length
                while items.len() < len {
                    let candidate = db_rng.gen_range(0..cfg.n_items);
                    if !items.contains(&candidate) {
                        items.push(candidate);
                    }
                }
                items.truncate(len);
                items
            };
            txs.push(Transaction::new(items));
        }
        databases[v as usize] = Some(TransactionDatabase::new(txs));
    }

    let databases: Vec<TransactionDatabase> = databases
        .into_iter()
        .map(|d| d.expect("every vertex built"))
        .collect();
    DatabaseNetwork::from_parts(edges, databases)
        .map_err(|e| SynthError::Infeasible(format!("internal generation error: {e}")))
}
