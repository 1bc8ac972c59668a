//! Theme network induction, edge cohesion and maximal pattern truss detection.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::model::{edge, DatabaseNetwork, Edge, Pattern};
use crate::rational::Rational;

/// The subgraph of a database network induced by the vertices where a
/// pattern has positive frequency, together with those frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct ThemeNetwork {
    pub pattern: Pattern,
    /// sorted ascending
    pub vertices: Vec<u32>,
    /// sorted, each (u, v) with u < v and both endpoints in `vertices`
    pub edges: Vec<Edge>,
    pub freq: BTreeMap<u32, Rational>,
}

impl ThemeNetwork {
    /// Induces the theme network of `p` from `g`. The empty pattern keeps the
    /// whole network with every frequency equal to 1.
    pub fn induce(g: &DatabaseNetwork, p: &Pattern) -> ThemeNetwork {
        let mut freq = BTreeMap::new();
        for v in 0..g.n_vertices() {
            let f = g.frequency(v, p);
            if !f.is_zero() {
                freq.insert(v, f);
            }
        }
        let edges = g
            .edges()
            .iter()
            .copied()
            .filter(|&(u, v)| freq.contains_key(&u) && freq.contains_key(&v))
            .collect();
        ThemeNetwork {
            pattern: p.clone(),
            vertices: freq.keys().copied().collect(),
            edges,
            freq,
        }
    }

    /// Induces the theme network of `p` restricted to a candidate edge set,
    /// recomputing frequencies only on the endpoints. Vertices where `p` has
    /// zero frequency are dropped together with their incident edges. Used by
    /// TCFI and TC-Tree construction, where the candidate edges come from the
    /// intersection of two parent trusses.
    pub fn induce_on_edges(g: &DatabaseNetwork, p: &Pattern, candidate_edges: &[Edge]) -> ThemeNetwork {
        let mut freq: BTreeMap<u32, Rational> = BTreeMap::new();
        for &(u, v) in candidate_edges {
            for w in [u, v] {
                freq.entry(w).or_insert_with(|| g.frequency(w, p));
            }
        }
        freq.retain(|_, f| !f.is_zero());
        let edges: Vec<Edge> = candidate_edges
            .iter()
            .copied()
            .filter(|&(u, v)| freq.contains_key(&u) && freq.contains_key(&v))
            .collect();
        let mut vertices: Vec<u32> = Vec::new();
        for &(u, v) in &edges {
            vertices.push(u);
            vertices.push(v);
        }
        vertices.sort_unstable();
        vertices.dedup();
        freq.retain(|v, _| vertices.binary_search(v).is_ok());
        ThemeNetwork {
            pattern: p.clone(),
            vertices,
            edges,
            freq,
        }
    }
}

/// The unique maximal pattern truss of a theme network at a threshold:
/// the edge-induced subgraph in which every edge cohesion strictly exceeds
/// `alpha`. May be empty.
#[derive(Clone, Debug, PartialEq)]
pub struct MaximalPatternTruss {
    pub pattern: Pattern,
    pub alpha: Rational,
    /// sorted; every vertex is an endpoint of at least one edge
    pub vertices: Vec<u32>,
    pub edges: Vec<Edge>,
    /// cohesion of each surviving edge within the truss itself
    pub cohesion: BTreeMap<Edge, Rational>,
}

impl MaximalPatternTruss {
    pub fn empty(pattern: Pattern, alpha: Rational) -> Self {
        MaximalPatternTruss {
            pattern,
            alpha,
            vertices: Vec::new(),
            edges: Vec::new(),
            cohesion: BTreeMap::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// One connected component of a maximal pattern truss.
#[derive(Clone, Debug, PartialEq)]
pub struct ThemeCommunity {
    pub pattern: Pattern,
    pub vertices: Vec<u32>,
    pub edges: Vec<Edge>,
}

/// Cohesion of every edge of `edges`, computed from scratch: for each edge,
/// the sum over triangles containing it of the minimum endpoint frequency.
pub fn cohesion_map(edges: &[Edge], freq: &BTreeMap<u32, Rational>) -> BTreeMap<Edge, Rational> {
    let adj = adjacency(edges);
    let mut out = BTreeMap::new();
    for &(u, v) in edges {
        let mut eco = Rational::zero();
        for k in common_neighbors(&adj, u, v) {
            eco = eco + min3(freq[&u], freq[&v], freq[&k]);
        }
        out.insert((u, v), eco);
    }
    out
}

/// Cohesion of a single edge within the subgraph formed by `edges`.
pub fn edge_cohesion(edges: &[Edge], freq: &BTreeMap<u32, Rational>, e: Edge) -> Rational {
    let adj = adjacency(edges);
    let (u, v) = e;
    let mut eco = Rational::zero();
    for k in common_neighbors(&adj, u, v) {
        eco = eco + min3(freq[&u], freq[&v], freq[&k]);
    }
    eco
}

fn min3(a: Rational, b: Rational, c: Rational) -> Rational {
    a.min(b).min(c)
}

fn adjacency(edges: &[Edge]) -> HashMap<u32, Vec<u32>> {
    let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    for a in adj.values_mut() {
        a.sort_unstable();
    }
    adj
}

fn common_neighbors(adj: &HashMap<u32, Vec<u32>>, u: u32, v: u32) -> Vec<u32> {
    let (Some(au), Some(av)) = (adj.get(&u), adj.get(&v)) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < au.len() && j < av.len() {
        match au[i].cmp(&av[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(au[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Maximal pattern truss detection by iterative edge peeling.
///
/// Computes each edge's cohesion, queues edges with cohesion <= alpha, and on
/// every removal subtracts the broken triangle's contribution from the two
/// co-triangle edges, queueing them if they drop to alpha or below. Each edge
/// is enqueued at most once. The surviving edges with their (now
/// within-survivor) cohesions form the unique maximal pattern truss.
pub fn mptd(gp: &ThemeNetwork, alpha: Rational) -> MaximalPatternTruss {
    let m = gp.edges.len();
    if m == 0 {
        return MaximalPatternTruss::empty(gp.pattern.clone(), alpha);
    }
    let mut eidx: HashMap<Edge, usize> = HashMap::with_capacity(m);
    for (i, &e) in gp.edges.iter().enumerate() {
        eidx.insert(e, i);
    }
    let adj = adjacency(&gp.edges);
    let f = |v: u32| gp.freq[&v];

    let mut eco: Vec<Rational> = Vec::with_capacity(m);
    let mut alive = vec![true; m];
    let mut enqueued = vec![false; m];
    let mut queue: VecDeque<usize> = VecDeque::new();

    for (i, &(u, v)) in gp.edges.iter().enumerate() {
        let mut c = Rational::zero();
        for k in common_neighbors(&adj, u, v) {
            c = c + min3(f(u), f(v), f(k));
        }
        eco.push(c);
        if c <= alpha {
            enqueued[i] = true;
            queue.push_back(i);
        }
    }

    while let Some(i) = queue.pop_front() {
        let (u, v) = gp.edges[i];
        for k in common_neighbors(&adj, u, v) {
            let iu = eidx[&edge(u, k)];
            let iv = eidx[&edge(v, k)];
            if !alive[iu] || !alive[iv] {
                continue;
            }
            let contribution = min3(f(u), f(v), f(k));
            eco[iu] = eco[iu] - contribution;
            eco[iv] = eco[iv] - contribution;
            for j in [iu, iv] {
                if eco[j] <= alpha && !enqueued[j] {
                    enqueued[j] = true;
                    queue.push_back(j);
                }
            }
        }
        alive[i] = false;
    }

    let mut edges_out = Vec::new();
    let mut cohesion = BTreeMap::new();
    for (i, &e) in gp.edges.iter().enumerate() {
        if alive[i] {
            edges_out.push(e);
            cohesion.insert(e, eco[i]);
        }
    }
    edges_out.sort_unstable();
    let mut vertices: Vec<u32> = Vec::new();
    for &(u, v) in &edges_out {
        vertices.push(u);
        vertices.push(v);
    }
    vertices.sort_unstable();
    vertices.dedup();
    MaximalPatternTruss {
        pattern: gp.pattern.clone(),
        alpha,
        vertices,
        edges: edges_out,
        cohesion,
    }
}

/// Connected components of a maximal pattern truss, ordered by their
/// smallest vertex id.
pub fn extract_communities(t: &MaximalPatternTruss) -> Vec<ThemeCommunity> {
    let adj = adjacency(&t.edges);
    let mut seen: BTreeMap<u32, bool> = t.vertices.iter().map(|&v| (v, false)).collect();
    let mut out = Vec::new();
    for &start in &t.vertices {
        if seen[&start] {
            continue;
        }
        let mut component = Vec::new();
        let mut stack = vec![start];
        seen.insert(start, true);
        while let Some(v) = stack.pop() {
            component.push(v);
            if let Some(ns) = adj.get(&v) {
                for &n in ns {
                    if !seen[&n] {
                        seen.insert(n, true);
                        stack.push(n);
                    }
                }
            }
        }
        component.sort_unstable();
        let edges = t
            .edges
            .iter()
            .copied()
            .filter(|&(u, _)| component.binary_search(&u).is_ok())
            .collect();
        out.push(ThemeCommunity {
            pattern: t.pattern.clone(),
            vertices: component,
            edges,
        });
    }
    out
}
