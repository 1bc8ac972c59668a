//! Truss decomposition: peel a maximal pattern truss at its ascending
//! sequence of minimum-cohesion thresholds and record the removed edge sets,
//! from which the truss at any threshold can be reconstructed.

use std::collections::BTreeMap;

use crate::model::{Edge, Pattern};
use crate::rational::Rational;
use crate::truss::{cohesion_map, mptd, MaximalPatternTruss, ThemeNetwork};

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionLevel {
    pub alpha: Rational,
    /// edges removed when the truss shrinks past this threshold; sorted
    pub removed: Vec<Edge>,
}

/// The ascending-threshold decomposition of C*_p(0). Level k stores
/// R_p(alpha_k) = E*_p(alpha_{k-1}) \ E*_p(alpha_k), where alpha_k is the
/// minimum edge cohesion of C*_p(alpha_{k-1}). The levels are pairwise
/// disjoint and their union is E*_p(0).
#[derive(Clone, Debug, PartialEq)]
pub struct TrussDecomposition {
    pub pattern: Pattern,
    pub levels: Vec<DecompositionLevel>,
    /// pattern frequency of every vertex of C*_p(0); kept so cohesion can be
    /// recomputed exactly within any reconstructed truss
    pub freq: BTreeMap<u32, Rational>,
}

impl TrussDecomposition {
    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// The maximum threshold: C*_p(alpha) is empty for all alpha >= this.
    pub fn alpha_star(&self) -> Rational {
        self.levels.last().map_or(Rational::zero(), |l| l.alpha)
    }

    pub fn edge_count(&self) -> usize {
        self.levels.iter().map(|l| l.removed.len()).sum()
    }
}

/// Decomposes the maximal pattern truss of `gp` at threshold 0.
pub fn decompose(gp: &ThemeNetwork) -> TrussDecomposition {
    let base = mptd(gp, Rational::zero());
    let freq: BTreeMap<u32, Rational> = base
        .vertices
        .iter()
        .map(|&v| (v, gp.freq[&v]))
        .collect();
    let mut levels = Vec::new();
    let mut current = base;
    while !current.edges.is_empty() {
        let alpha_k = *current.cohesion.values().min().expect("nonempty truss");
        let sub = ThemeNetwork {
            pattern: gp.pattern.clone(),
            vertices: current.vertices.clone(),
            edges: current.edges.clone(),
            freq: current
                .vertices
                .iter()
                .map(|&v| (v, freq[&v]))
                .collect(),
        };
        let next = mptd(&sub, alpha_k);
        let removed: Vec<Edge> = current
            .edges
            .iter()
            .copied()
            .filter(|e| next.edges.binary_search(e).is_err())
            .collect();
        debug_assert!(!removed.is_empty());
        levels.push(DecompositionLevel {
            alpha: alpha_k,
            removed,
        });
        current = next;
    }
    TrussDecomposition {
        pattern: gp.pattern.clone(),
        levels,
        freq,
    }
}

/// Reconstructs C*_p(alpha) as the union of the removed-edge sets of every
/// level with threshold strictly greater than `alpha`. Cohesions are
/// recomputed within the reconstructed subgraph.
pub fn reconstruct(l: &TrussDecomposition, alpha: Rational) -> MaximalPatternTruss {
    let mut edges: Vec<Edge> = l
        .levels
        .iter()
        .filter(|lvl| lvl.alpha > alpha)
        .flat_map(|lvl| lvl.removed.iter().copied())
        .collect();
    edges.sort_unstable();
    let mut vertices: Vec<u32> = Vec::new();
    for &(u, v) in &edges {
        vertices.push(u);
        vertices.push(v);
    }
    vertices.sort_unstable();
    vertices.dedup();
    let freq: BTreeMap<u32, Rational> = vertices.iter().map(|&v| (v, l.freq[&v])).collect();
    let cohesion = cohesion_map(&edges, &freq);
    MaximalPatternTruss {
        pattern: l.pattern.clone(),
        alpha,
        vertices,
        edges,
        cohesion,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform_net(edges: Vec<Edge>, f: Rational) -> ThemeNetwork {
        let mut vertices: Vec<u32> = Vec::new();
        for &(u, v) in &edges {
            vertices.push(u);
            vertices.push(v);
        }
        vertices.sort_unstable();
        vertices.dedup();
        let freq = vertices.iter().map(|&v| (v, f)).collect();
        ThemeNetwork {
            pattern: Pattern::empty(),
            vertices,
            edges,
            freq,
        }
    }

    #[test]
    fn triangle_with_half_frequencies_has_one_level() {
        let g = uniform_net(vec![(0, 1), (0, 2), (1, 2)], Rational::new(1, 2));
        let l = decompose(&g);
        assert_eq!(l.levels.len(), 1);
        assert_eq!(l.levels[0].alpha, Rational::new(1, 2));
        assert_eq!(l.levels[0].removed.len(), 3);
        assert_eq!(l.alpha_star(), Rational::new(1, 2));
        assert_eq!(reconstruct(&l, Rational::new(2, 5)).edges.len(), 3);
        assert!(reconstruct(&l, Rational::new(1, 2)).is_empty());
    }

    #[test]
    fn k4_with_unit_frequencies_collapses_in_one_level() {
        let g = uniform_net(
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
            Rational::one(),
        );
        let l = decompose(&g);
        assert_eq!(l.levels.len(), 1);
        assert_eq!(l.levels[0].alpha, Rational::from_int(2));
        assert_eq!(l.levels[0].removed.len(), 6);
        assert_eq!(l.alpha_star(), Rational::from_int(2));
    }

    #[test]
    fn triangle_free_graph_decomposes_to_nothing() {
        let g = uniform_net(vec![(0, 1), (1, 2), (2, 3)], Rational::one());
        let l = decompose(&g);
        assert!(l.is_empty());
        assert_eq!(l.alpha_star(), Rational::zero());
        assert!(reconstruct(&l, Rational::zero()).is_empty());
    }

    #[test]
    fn reconstruction_at_zero_equals_mptd_with_cohesions() {
        let g = uniform_net(
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4), (2, 4)],
            Rational::new(2, 3),
        );
        let l = decompose(&g);
        let direct = mptd(&g, Rational::zero());
        let rebuilt = reconstruct(&l, Rational::zero());
        assert_eq!(rebuilt.edges, direct.edges);
        assert_eq!(rebuilt.cohesion, direct.cohesion);
    }

    fn arbitrary_theme_network() -> impl Strategy<Value = ThemeNetwork> {
        (3u32..10, any::<u64>()).prop_map(|(n, seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(0.55) {
                        edges.push((u, v));
                    }
                }
            }
            let mut vertices: Vec<u32> = Vec::new();
            for &(u, v) in &edges {
                vertices.push(u);
                vertices.push(v);
            }
            vertices.sort_unstable();
            vertices.dedup();
            let freq = vertices
                .iter()
                .map(|&v| (v, Rational::new(rng.gen_range(1..=5), 5)))
                .collect();
            ThemeNetwork {
                pattern: Pattern::empty(),
                vertices,
                edges,
                freq,
            }
        })
    }

    proptest! {
        #[test]
        fn round_trip_matches_mptd_at_thresholds_and_midpoints(g in arbitrary_theme_network()) {
            let l = decompose(&g);
            let mut probes = vec![Rational::zero(), l.alpha_star()];
            for w in l.levels.windows(2) {
                let mid = Rational::new(1, 2) * (w[0].alpha + w[1].alpha);
                probes.push(mid);
            }
            for lvl in &l.levels {
                probes.push(lvl.alpha);
            }
            for alpha in probes {
                let rebuilt = reconstruct(&l, alpha);
                let direct = mptd(&g, alpha);
                prop_assert_eq!(&rebuilt.edges, &direct.edges);
            }
        }

        #[test]
        fn levels_partition_the_base_edge_set(g in arbitrary_theme_network()) {
            let l = decompose(&g);
            let base = mptd(&g, Rational::zero());
            prop_assert_eq!(l.edge_count(), base.edges.len());
            let mut all: Vec<Edge> = l.levels.iter().flat_map(|lvl| lvl.removed.clone()).collect();
            all.sort_unstable();
            let mut deduped = all.clone();
            deduped.dedup();
            prop_assert_eq!(all.len(), deduped.len());
            prop_assert_eq!(deduped, base.edges);
            // strictly ascending thresholds, strict shrink per level
            for w in l.levels.windows(2) {
                prop_assert!(w[0].alpha < w[1].alpha);
            }
        }
    }
}
