//! The three theme community miners (TCS, TCFA, TCFI) plus the brute-force
//! oracle. All four return the identical pattern -> maximal pattern truss
//! map when TCS runs with epsilon = 0 and an unbounded pattern length.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use crate::model::{DatabaseNetwork, Edge, Pattern};
use crate::rational::Rational;
use crate::truss::{cohesion_map, mptd, MaximalPatternTruss, ThemeNetwork};

pub const DEFAULT_MAX_LEN: usize = 8;
pub const DEFAULT_CANDIDATE_CAP: usize = 10_000_000;

/// Environment variable that lifts the brute-force oracle size guards.
pub const GUARD_OFF_ENV: &str = "THEMETRUSS_GUARD_OFF";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MiningStats {
    pub mptd_calls: u64,
    pub candidates_generated: u64,
    pub wall_ms: u128,
}

#[derive(Clone, Debug)]
pub struct MiningResult {
    pub alpha: Rational,
    /// keyed by canonical pattern; every stored truss is nonempty
    pub trusses: BTreeMap<Pattern, MaximalPatternTruss>,
    pub stats: MiningStats,
}

impl MiningResult {
    /// Pattern -> sorted edge set view, the comparison currency for the
    /// exactness checks.
    pub fn edge_map(&self) -> BTreeMap<Pattern, Vec<Edge>> {
        self.trusses
            .iter()
            .map(|(p, t)| (p.clone(), t.edges.clone()))
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MinerError {
    #[error("candidate set cap exceeded: {count} candidates > cap {cap}")]
    CandidateCapExceeded { count: usize, cap: usize },
    #[error("oracle guard exceeded: {0} (set {GUARD_OFF_ENV}=1 to override)")]
    GuardExceeded(String),
}

/// NP / NV / NE: number of trusses, and vertex / edge counts summed with
/// multiplicity across all trusses.
pub fn count_metrics(r: &MiningResult) -> (u64, u64, u64) {
    let np = r.trusses.len() as u64;
    let nv = r.trusses.values().map(|t| t.vertices.len() as u64).sum();
    let ne = r.trusses.values().map(|t| t.edges.len() as u64).sum();
    (np, nv, ne)
}

/// Apriori candidate generation: unions of qualified length-(k-1) pattern
/// pairs, kept only when every length-(k-1) sub-pattern is qualified.
pub fn gen_apriori_candidates(prev: &BTreeSet<Pattern>) -> BTreeSet<Pattern> {
    gen_candidates_with_parents(prev)
        .into_keys()
        .collect()
}

/// As `gen_apriori_candidates`, but records every parent pair whose union
/// produced each candidate. TCFI picks its intersection seed among them.
fn gen_candidates_with_parents(
    prev: &BTreeSet<Pattern>,
) -> BTreeMap<Pattern, Vec<(Pattern, Pattern)>> {
    let items: Vec<&Pattern> = prev.iter().collect();
    let Some(first) = items.first() else {
        return BTreeMap::new();
    };
    let k = first.len() + 1;
    let mut candidates: BTreeMap<Pattern, Vec<(Pattern, Pattern)>> = BTreeMap::new();
    for i in 0..items.len() {
        for j in (i + 1)..items.len() {
            let union = items[i].union(items[j]);
            if union.len() != k {
                continue;
            }
            candidates
                .entry(union)
                .or_default()
                .push((items[i].clone(), items[j].clone()));
        }
    }
    candidates.retain(|c, _| c.sub_patterns().all(|s| prev.contains(&s)));
    candidates
}

fn finish(
    alpha: Rational,
    trusses: BTreeMap<Pattern, MaximalPatternTruss>,
    mptd_calls: &AtomicU64,
    candidates_generated: u64,
    started: Instant,
) -> MiningResult {
    MiningResult {
        alpha,
        trusses,
        stats: MiningStats {
            mptd_calls: mptd_calls.load(Ordering::Relaxed),
            candidates_generated,
            wall_ms: started.elapsed().as_millis(),
        },
    }
}

/// Theme Community Scanner: enumerate per vertex every pattern whose local
/// frequency strictly exceeds `epsilon` (up to `max_len` items), then run
/// MPTD on the theme network of each candidate. With epsilon > 0 this is a
/// lossy baseline: communities of vertices whose frequencies never exceed
/// epsilon are missed.
pub fn tcs(
    g: &DatabaseNetwork,
    alpha: Rational,
    epsilon: Rational,
    max_len: usize,
    candidate_cap: usize,
) -> Result<MiningResult, MinerError> {
    let started = Instant::now();
    let mut candidates: BTreeSet<Pattern> = BTreeSet::new();
    for v in 0..g.n_vertices() {
        let db = g.database(v);
        let mut local_items: Vec<u32> = db
            .transactions()
            .iter()
            .flat_map(|t| t.items().iter().copied())
            .collect();
        local_items.sort_unstable();
        local_items.dedup();
        // depth-first enumeration; frequency anti-monotonicity prunes
        // extensions of any pattern already at or below epsilon
        let mut stack: Vec<(Pattern, usize)> = vec![(Pattern::empty(), 0)];
        while let Some((p, start)) = stack.pop() {
            for (offset, &item) in local_items[start..].iter().enumerate() {
                let q = p.with_item(item);
                if db.frequency(&q) > epsilon {
                    candidates.insert(q.clone());
                    if candidates.len() > candidate_cap {
                        return Err(MinerError::CandidateCapExceeded {
                            count: candidates.len(),
                            cap: candidate_cap,
                        });
                    }
                    if q.len() < max_len {
                        stack.push((q, start + offset + 1));
                    }
                }
            }
        }
    }
    let mptd_calls = AtomicU64::new(0);
    let candidate_count = candidates.len() as u64;
    let mined: Vec<(Pattern, MaximalPatternTruss)> = candidates
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .filter_map(|p| {
            let gp = ThemeNetwork::induce(g, &p);
            mptd_calls.fetch_add(1, Ordering::Relaxed);
            let t = mptd(&gp, alpha);
            (!t.is_empty()).then_some((p, t))
        })
        .collect();
    let trusses: BTreeMap<Pattern, MaximalPatternTruss> = mined.into_iter().collect();
    Ok(finish(alpha, trusses, &mptd_calls, candidate_count, started))
}

fn qualified_singletons(
    g: &DatabaseNetwork,
    alpha: Rational,
    mptd_calls: &AtomicU64,
) -> BTreeMap<Pattern, MaximalPatternTruss> {
    let mined: Vec<(Pattern, MaximalPatternTruss)> = (0..g.n_items())
        .into_par_iter()
        .filter_map(|item| {
            let p = Pattern::singleton(item);
            let gp = ThemeNetwork::induce(g, &p);
            mptd_calls.fetch_add(1, Ordering::Relaxed);
            let t = mptd(&gp, alpha);
            (!t.is_empty()).then_some((p, t))
        })
        .collect();
    mined.into_iter().collect()
}

/// Theme Community Finder Apriori: level-wise mining where a length-k
/// candidate survives only if all its length-(k-1) sub-patterns were
/// qualified; each surviving candidate is tested by MPTD on its theme
/// network induced from the whole database network.
pub fn tcfa(g: &DatabaseNetwork, alpha: Rational) -> MiningResult {
    let started = Instant::now();
    let mptd_calls = AtomicU64::new(0);
    let mut candidates_generated = g.n_items() as u64;
    let mut trusses = qualified_singletons(g, alpha, &mptd_calls);
    let mut level: BTreeSet<Pattern> = trusses.keys().cloned().collect();
    while !level.is_empty() {
        let candidates = gen_apriori_candidates(&level);
        candidates_generated += candidates.len() as u64;
        let mined: Vec<(Pattern, MaximalPatternTruss)> = candidates
            .into_iter()
            .collect::<Vec<_>>()
            .into_par_iter()
            .filter_map(|p| {
                let gp = ThemeNetwork::induce(g, &p);
                mptd_calls.fetch_add(1, Ordering::Relaxed);
                let t = mptd(&gp, alpha);
                (!t.is_empty()).then_some((p, t))
            })
            .collect();
        level = mined.iter().map(|(p, _)| p.clone()).collect();
        trusses.extend(mined);
    }
    finish(alpha, trusses, &mptd_calls, candidates_generated, started)
}

/// Theme Community Finder Intersection: TCFA with the graph intersection
/// property. Each candidate's theme network is induced from the edge
/// intersection of its two parents' trusses; candidates whose parents share
/// no edge are pruned without calling MPTD. Among multiple generating parent
/// pairs the one with the fewest common edges is used.
pub fn tcfi(g: &DatabaseNetwork, alpha: Rational) -> MiningResult {
    let started = Instant::now();
    let mptd_calls = AtomicU64::new(0);
    let mut candidates_generated = g.n_items() as u64;
    let mut trusses = qualified_singletons(g, alpha, &mptd_calls);
    let mut level: BTreeMap<Pattern, MaximalPatternTruss> = trusses.clone();
    while !level.is_empty() {
        let level_patterns: BTreeSet<Pattern> = level.keys().cloned().collect();
        let candidates = gen_candidates_with_parents(&level_patterns);
        candidates_generated += candidates.len() as u64;
        let seeded: Vec<(Pattern, Vec<Edge>)> = candidates
            .into_iter()
            .map(|(c, pairs)| {
                let seed = pairs
                    .iter()
                    .map(|(p, q)| intersect_edges(&level[p].edges, &level[q].edges))
                    .min_by_key(|edges| edges.len())
                    .expect("candidate has at least one generating pair");
                (c, seed)
            })
            .collect();
        let mined: Vec<(Pattern, MaximalPatternTruss)> = seeded
            .into_par_iter()
            .filter_map(|(p, seed)| {
                if seed.is_empty() {
                    return None;
                }
                let gp = ThemeNetwork::induce_on_edges(g, &p, &seed);
                if gp.edges.is_empty() {
                    return None;
                }
                mptd_calls.fetch_add(1, Ordering::Relaxed);
                let t = mptd(&gp, alpha);
                (!t.is_empty()).then_some((p, t))
            })
            .collect();
        level = mined.iter().cloned().collect();
        trusses.extend(mined);
    }
    finish(alpha, trusses, &mptd_calls, candidates_generated, started)
}

fn intersect_edges(a: &[Edge], b: &[Edge]) -> Vec<Edge> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Independent test oracle: enumerate every pattern with positive frequency
/// somewhere, induce its theme network, and reach the truss fixpoint by
/// recomputing all cohesions from scratch each round. Shares no peeling
/// machinery with `mptd`.
pub fn brute_force_mine(
    g: &DatabaseNetwork,
    alpha: Rational,
    max_len: usize,
) -> Result<MiningResult, MinerError> {
    let guard_off = std::env::var(GUARD_OFF_ENV).is_ok_and(|v| v == "1");
    if !guard_off {
        if g.n_vertices() > 64 {
            return Err(MinerError::GuardExceeded(format!(
                "{} vertices > 64",
                g.n_vertices()
            )));
        }
        if g.n_items() > 12 {
            return Err(MinerError::GuardExceeded(format!(
                "{} items > 12",
                g.n_items()
            )));
        }
    }
    let started = Instant::now();
    let mut patterns: Vec<Pattern> = Vec::new();
    let mut frontier: Vec<Pattern> = vec![Pattern::empty()];
    // grow item by item, keeping only patterns frequent (> 0) at some vertex
    for _ in 0..max_len {
        let mut next = Vec::new();
        for p in &frontier {
            let start = p.items().last().map_or(0, |&i| i + 1);
            for item in start..g.n_items() {
                let q = p.with_item(item);
                let alive = (0..g.n_vertices()).any(|v| !g.frequency(v, &q).is_zero());
                if alive {
                    patterns.push(q.clone());
                    next.push(q);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let mut trusses = BTreeMap::new();
    for p in patterns {
        let gp = ThemeNetwork::induce(g, &p);
        let t = naive_fixpoint(&gp, alpha);
        if !t.is_empty() {
            trusses.insert(p, t);
        }
    }
    Ok(MiningResult {
        alpha,
        trusses,
        stats: MiningStats {
            mptd_calls: 0,
            candidates_generated: 0,
            wall_ms: started.elapsed().as_millis(),
        },
    })
}

/// From-scratch deletion fixpoint: recompute every cohesion over the current
/// edge set each round and drop all edges at or below alpha, until stable.
fn naive_fixpoint(gp: &ThemeNetwork, alpha: Rational) -> MaximalPatternTruss {
    let mut edges = gp.edges.clone();
    edges.sort_unstable();
    loop {
        let cohesions = cohesion_map(&edges, &gp.freq);
        let surviving: Vec<Edge> = edges
            .iter()
            .copied()
            .filter(|e| cohesions[e] > alpha)
            .collect();
        if surviving.len() == edges.len() {
            let mut vertices: Vec<u32> = Vec::new();
            for &(u, v) in &edges {
                vertices.push(u);
                vertices.push(v);
            }
            vertices.sort_unstable();
            vertices.dedup();
            return MaximalPatternTruss {
                pattern: gp.pattern.clone(),
                alpha,
                vertices,
                edges: surviving,
                cohesion: cohesions,
            };
        }
        edges = surviving;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Transaction, TransactionDatabase};
    use rand::{Rng, SeedableRng};

    fn pat(items: &[u32]) -> Pattern {
        Pattern::new(items.iter().copied())
    }

    #[test]
    fn apriori_generation_examples() {
        let prev: BTreeSet<Pattern> = [pat(&[0]), pat(&[1])].into_iter().collect();
        let out = gen_apriori_candidates(&prev);
        assert_eq!(out, [pat(&[0, 1])].into_iter().collect());

        let prev: BTreeSet<Pattern> = [pat(&[0, 1]), pat(&[0, 2])].into_iter().collect();
        assert!(gen_apriori_candidates(&prev).is_empty());

        let prev: BTreeSet<Pattern> =
            [pat(&[0, 1]), pat(&[0, 2]), pat(&[1, 2])].into_iter().collect();
        let out = gen_apriori_candidates(&prev);
        assert_eq!(out, [pat(&[0, 1, 2])].into_iter().collect());
    }

    /// Triangle whose three vertices share one database.
    fn identical_triangle(db: &[&[u32]]) -> DatabaseNetwork {
        let d = TransactionDatabase::new(
            db.iter().map(|t| Transaction::new(t.iter().copied())).collect(),
        );
        DatabaseNetwork::from_parts(vec![(0, 1), (1, 2), (0, 2)], vec![d.clone(), d.clone(), d])
            .unwrap()
    }

    fn random_network(seed: u64) -> DatabaseNetwork {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(4..12);
        let n_items = rng.gen_range(2..5u32);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen_bool(0.5) {
                    edges.push((u, v));
                }
            }
        }
        let dbs = (0..n)
            .map(|_| {
                let h = rng.gen_range(1..5);
                TransactionDatabase::new(
                    (0..h)
                        .map(|_| {
                            let mut items: Vec<u32> =
                                (0..n_items).filter(|_| rng.gen_bool(0.6)).collect();
                            if items.is_empty() {
                                items.push(rng.gen_range(0..n_items));
                            }
                            Transaction::new(items)
                        })
                        .collect(),
                )
            })
            .collect();
        DatabaseNetwork::from_parts(edges, dbs).unwrap()
    }

    #[test]
    fn all_miners_agree_on_random_networks() {
        for seed in 0..8 {
            let g = random_network(seed);
            for alpha in [Rational::zero(), Rational::new(1, 2), Rational::one()] {
                let oracle = brute_force_mine(&g, alpha, g.n_items() as usize)
                    .unwrap()
                    .edge_map();
                let a = tcfa(&g, alpha).edge_map();
                let i = tcfi(&g, alpha).edge_map();
                let s = tcs(&g, alpha, Rational::zero(), g.n_items() as usize, 1 << 20)
                    .unwrap()
                    .edge_map();
                assert_eq!(a, oracle, "tcfa seed {seed} alpha {alpha:?}");
                assert_eq!(i, oracle, "tcfi seed {seed} alpha {alpha:?}");
                assert_eq!(s, oracle, "tcs seed {seed} alpha {alpha:?}");
            }
        }
    }

    #[test]
    fn tcs_with_epsilon_one_finds_nothing() {
        let g = identical_triangle(&[&[0, 1], &[0]]);
        let r = tcs(&g, Rational::zero(), Rational::one(), 4, 1 << 20).unwrap();
        assert!(r.trusses.is_empty());
    }

    #[test]
    fn tcs_high_epsilon_misses_low_frequency_communities() {
        // every frequency is 1/2, which does not exceed epsilon = 1/2
        let g = identical_triangle(&[&[0], &[1]]);
        let complete = tcs(&g, Rational::zero(), Rational::zero(), 4, 1 << 20).unwrap();
        assert!(!complete.trusses.is_empty());
        let filtered = tcs(&g, Rational::zero(), Rational::new(1, 2), 4, 1 << 20).unwrap();
        assert!(filtered.trusses.is_empty());
    }

    #[test]
    fn tcs_candidate_cap_aborts() {
        let g = identical_triangle(&[&[0, 1, 2, 3]]);
        let err = tcs(&g, Rational::zero(), Rational::zero(), 4, 3).unwrap_err();
        assert!(matches!(err, MinerError::CandidateCapExceeded { .. }));
    }

    #[test]
    fn tcfa_prunes_supersets_of_unqualified_patterns() {
        // item 1 appears only at one vertex: {1} is unqualified, so {0,1}
        // must never be tested by MPTD
        let d01 = TransactionDatabase::new(vec![Transaction::new([0, 1])]);
        let d0 = TransactionDatabase::new(vec![Transaction::new([0])]);
        let g = DatabaseNetwork::from_parts(
            vec![(0, 1), (1, 2), (0, 2)],
            vec![d01, d0.clone(), d0],
        )
        .unwrap();
        let r = tcfa(&g, Rational::zero());
        // two singleton MPTD calls only; no level-2 candidates survive the join
        assert_eq!(r.stats.mptd_calls, 2);
        assert_eq!(r.trusses.keys().cloned().collect::<Vec<_>>(), vec![pat(&[0])]);
    }

    #[test]
    fn tcfi_prunes_disjoint_parent_trusses_without_mptd() {
        // two vertex-disjoint triangles; items 0 and 1 are frequent on
        // different triangles, so {0,1}'s parents have disjoint trusses
        let d0 = TransactionDatabase::new(vec![Transaction::new([0])]);
        let d1 = TransactionDatabase::new(vec![Transaction::new([1])]);
        let g = DatabaseNetwork::from_parts(
            vec![(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)],
            vec![d0.clone(), d0.clone(), d0, d1.clone(), d1.clone(), d1],
        )
        .unwrap();
        let fa = tcfa(&g, Rational::zero());
        let fi = tcfi(&g, Rational::zero());
        assert_eq!(fa.edge_map(), fi.edge_map());
        // tcfa tests candidate {0,1}; tcfi prunes it via empty intersection
        assert_eq!(fa.stats.mptd_calls, 3);
        assert_eq!(fi.stats.mptd_calls, 2);
    }

    #[test]
    fn brute_force_triangle_matches_frequent_pattern_count() {
        let g = identical_triangle(&[&[0, 1], &[0, 2], &[1, 2]]);
        let alpha = Rational::new(1, 4);
        let r = brute_force_mine(&g, alpha, 3).unwrap();
        let db = g.database(0);
        let mut expected = 0;
        for mask in 1u32..(1 << g.n_items()) {
            let p = Pattern::new((0..g.n_items()).filter(|i| mask & (1 << i) != 0));
            if db.frequency(&p) > alpha {
                expected += 1;
            }
        }
        assert_eq!(r.trusses.len(), expected);
    }

    #[test]
    fn brute_force_guard_trips() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let dbs = (0..70)
            .map(|_| {
                TransactionDatabase::new(vec![Transaction::new([rng.gen_range(0..3u32)])])
            })
            .collect();
        let g = DatabaseNetwork::from_parts(vec![(0, 1)], dbs).unwrap();
        assert!(matches!(
            brute_force_mine(&g, Rational::zero(), 2),
            Err(MinerError::GuardExceeded(_))
        ));
    }

    #[test]
    fn count_metrics_with_multiplicity() {
        let g = identical_triangle(&[&[0, 1]]);
        let r = tcfi(&g, Rational::zero());
        // patterns {0}, {1}, {0,1} all give the same triangle truss
        let (np, nv, ne) = count_metrics(&r);
        assert_eq!((np, nv, ne), (3, 9, 9));
        let empty = MiningResult {
            alpha: Rational::zero(),
            trusses: BTreeMap::new(),
            stats: MiningStats::default(),
        };
        assert_eq!(count_metrics(&empty), (0, 0, 0));
    }

    #[test]
    fn results_respect_graph_anti_monotonicity() {
        for seed in 20..26 {
            let g = random_network(seed);
            let r = tcfi(&g, Rational::zero());
            for (p1, t1) in &r.trusses {
                for (p2, t2) in &r.trusses {
                    if p1.is_subset_of(p2) && p1 != p2 {
                        for e in &t2.edges {
                            assert!(t1.edges.contains(e));
                        }
                    }
                }
            }
        }
    }
}
