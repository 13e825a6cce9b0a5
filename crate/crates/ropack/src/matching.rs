//! Maximum-weight bipartite matching on the feasibility graph: items on the
//! left, bins on the right, an edge wherever an option fits alone into its
//! bin.
//!
//! The optimum value comes from a Kuhn-Munkres solve on a dense cost matrix
//! padded with zero-cost skip columns (matching a node to a pad column
//! leaves it unmatched). The returned pair set is reconstructed separately:
//! edges are scanned in (item, bin) order and kept whenever forcing them
//! still completes to the optimal value, which yields the lexicographically
//! smallest optimal pair set without any epsilon comparisons. Zero-weight
//! edges never change the objective and are excluded from the result.

use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityGraph {
    n_items: usize,
    n_bins: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl FeasibilityGraph {
    pub fn new(n_items: usize, n_bins: usize, mut edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, w) in &edges {
            if i >= n_items || j >= n_bins {
                return Err(Error::structural(format!(
                    "edge ({}, {}) out of range for {}x{} graph",
                    i + 1,
                    j + 1,
                    n_items,
                    n_bins
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::structural(format!("edge weight {w} must be >= 0")));
            }
        }
        edges.sort_by_key(|e| (e.0, e.1));
        edges.dedup_by_key(|e| (e.0, e.1));
        Ok(FeasibilityGraph {
            n_items,
            n_bins,
            edges,
        })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Edges as (item, bin, weight), sorted by (item, bin).
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }
}

/// Node-disjoint pairs with their total weight (folded over pairs sorted by
/// item index).
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub weight: f64,
}

impl Matching {
    pub fn empty() -> Self {
        Matching {
            pairs: Vec::new(),
            weight: 0.0,
        }
    }

    /// The bin an item is matched to, if any.
    pub fn bin_of(&self, item: usize) -> Option<usize> {
        self.pairs
            .iter()
            .find(|&&(i, _)| i == item)
            .map(|&(_, j)| j)
    }
}

/// Feasibility graph of the whole instance: an edge (i, j) of weight
/// `p[i][j]` iff the option exists and fits alone into bin j.
pub fn build_graph(instance: &Instance) -> FeasibilityGraph {
    let items: Vec<usize> = (0..instance.n()).collect();
    build_graph_for_items(instance, &items)
}

/// Same, restricted to a set of items; edge endpoints keep original indices.
pub(crate) fn build_graph_for_items(instance: &Instance, items: &[usize]) -> FeasibilityGraph {
    let mut edges = Vec::new();
    for &i in items {
        for (&j, opt) in &instance.items()[i].options {
            if opt.fits_alone(instance.capacity(j)) {
                edges.push((i, j, opt.profit));
            }
        }
    }
    FeasibilityGraph {
        n_items: instance.n(),
        n_bins: instance.m(),
        edges,
    }
}

fn canonical_weight(pairs: &[(usize, usize, f64)]) -> f64 {
    let mut sorted: Vec<_> = pairs.to_vec();
    sorted.sort_by_key(|e| (e.0, e.1));
    sorted.iter().map(|&(_, _, p)| p).sum()
}

/// Min-cost assignment of every row to a distinct column (n <= m), via the
/// potentials form of Kuhn-Munkres; O(n^2 m). Returns the column of each row.
fn hungarian_min(n: usize, m: usize, cost: &[f64]) -> Vec<usize> {
    debug_assert!(n <= m && cost.len() == n * m);
    const NONE: usize = usize::MAX;
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; m + 1];
    let mut col_row = vec![NONE; m + 1]; // column m is the virtual root
    for row in 0..n {
        col_row[m] = row;
        let mut j0 = m;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut way = vec![m; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = m;
            for j in 0..m {
                if !used[j] {
                    let reduced = cost[i0 * m + j] - u[i0] - v[j];
                    if reduced < minv[j] {
                        minv[j] = reduced;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == NONE {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == m {
                break;
            }
        }
    }
    let mut assignment = vec![NONE; n];
    for j in 0..m {
        if col_row[j] != NONE {
            assignment[col_row[j]] = j;
        }
    }
    assignment
}

/// Best matching over the positive edges that avoids the excluded nodes.
/// Returns (item, bin, weight) triples.
fn best_completion(
    edges: &[(usize, usize, f64)],
    excluded_items: &[bool],
    excluded_bins: &[bool],
) -> Vec<(usize, usize, f64)> {
    let active: Vec<&(usize, usize, f64)> = edges
        .iter()
        .filter(|&&(i, j, _)| !excluded_items[i] && !excluded_bins[j])
        .collect();
    if active.is_empty() {
        return Vec::new();
    }
    let mut items: Vec<usize> = active.iter().map(|e| e.0).collect();
    items.sort_unstable();
    items.dedup();
    let mut bins: Vec<usize> = active.iter().map(|e| e.1).collect();
    bins.sort_unstable();
    bins.dedup();

    // rows = smaller side; pad with one skip column per row
    let transposed = bins.len() < items.len();
    let (rows, cols): (&[usize], &[usize]) = if transposed {
        (&bins, &items)
    } else {
        (&items, &bins)
    };
    let n = rows.len();
    let m = cols.len() + n;
    let row_of = |id: usize| rows.binary_search(&id).unwrap();
    let col_of = |id: usize| cols.binary_search(&id).unwrap();

    let mut cost = vec![0.0f64; n * m];
    for &&(i, j, p) in &active {
        let (r, c) = if transposed {
            (row_of(j), col_of(i))
        } else {
            (row_of(i), col_of(j))
        };
        cost[r * m + c] = -p;
    }
    let assignment = hungarian_min(n, m, &cost);
    let mut pairs = Vec::new();
    for (r, &c) in assignment.iter().enumerate() {
        if c < cols.len() && cost[r * m + c] < 0.0 {
            let (i, j) = if transposed {
                (cols[c], rows[r])
            } else {
                (rows[r], cols[c])
            };
            pairs.push((i, j, -cost[r * m + c]));
        }
    }
    pairs
}

/// Maximum-weight matching; among optimal matchings, the lexicographically
/// smallest pair set (pairs compared as sequences sorted by item, then bin).
pub fn max_weight_matching(graph: &FeasibilityGraph) -> Matching {
    let positive: Vec<(usize, usize, f64)> = graph
        .edges
        .iter()
        .filter(|&&(_, _, p)| p > 0.0)
        .copied()
        .collect();
    if positive.is_empty() {
        return Matching::empty();
    }

    // single-bin graphs reduce to an argmax
    let bin0 = positive[0].1;
    if positive.iter().all(|&(_, j, _)| j == bin0) {
        let mut best = positive[0];
        for &e in &positive[1..] {
            if e.2 > best.2 {
                best = e;
            }
        }
        return Matching {
            pairs: vec![(best.0, best.1)],
            weight: best.2,
        };
    }

    let no_items = vec![false; graph.n_items];
    let no_bins = vec![false; graph.n_bins];
    let base = best_completion(&positive, &no_items, &no_bins);
    let total = canonical_weight(&base);

    let mut used_items = no_items;
    let mut used_bins = no_bins;
    let mut forced: Vec<(usize, usize, f64)> = Vec::new();
    let mut witness = base.clone();
    for &(i, j, p) in &positive {
        if used_items[i] || used_bins[j] {
            continue;
        }
        if witness.iter().any(|&(wi, wj, _)| wi == i && wj == j) {
            forced.push((i, j, p));
            used_items[i] = true;
            used_bins[j] = true;
            continue;
        }
        used_items[i] = true;
        used_bins[j] = true;
        let completion = best_completion(&positive, &used_items, &used_bins);
        let mut candidate = forced.clone();
        candidate.push((i, j, p));
        candidate.extend_from_slice(&completion);
        if canonical_weight(&candidate) == total {
            forced.push((i, j, p));
            witness = candidate;
        } else {
            used_items[i] = false;
            used_bins[j] = false;
        }
    }

    if canonical_weight(&forced) != total {
        // float dust defeated the reconstruction; fall back to the direct
        // optimal assignment, which is still deterministic
        let mut pairs: Vec<(usize, usize)> = base.iter().map(|&(i, j, _)| (i, j)).collect();
        pairs.sort_unstable();
        return Matching {
            weight: total,
            pairs,
        };
    }
    Matching {
        pairs: forced.iter().map(|&(i, j, _)| (i, j)).collect(),
        weight: total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(n: usize, m: usize, edges: &[(usize, usize, f64)]) -> FeasibilityGraph {
        FeasibilityGraph::new(n, m, edges.to_vec()).unwrap()
    }

    /// Exhaustive maximum-weight matching keeping the lexicographically
    /// smallest optimal pair sequence.
    fn brute_force(n_items: usize, n_bins: usize, edges: &[(usize, usize, f64)]) -> Matching {
        fn pairs_less(a: &[(usize, usize)], b: &[(usize, usize)]) -> bool {
            for (x, y) in a.iter().zip(b.iter()) {
                if x != y {
                    return x < y;
                }
            }
            a.len() < b.len()
        }
        fn recurse(
            item: usize,
            n_items: usize,
            by_item: &[Vec<(usize, f64)>],
            bin_used: &mut Vec<bool>,
            chosen: &mut Vec<(usize, usize)>,
            weight: f64,
            best: &mut (f64, Vec<(usize, usize)>),
        ) {
            if item == n_items {
                if weight > best.0 || (weight == best.0 && pairs_less(chosen, &best.1)) {
                    *best = (weight, chosen.clone());
                }
                return;
            }
            recurse(item + 1, n_items, by_item, bin_used, chosen, weight, best);
            for &(j, p) in &by_item[item] {
                if !bin_used[j] && p > 0.0 {
                    bin_used[j] = true;
                    chosen.push((item, j));
                    recurse(
                        item + 1,
                        n_items,
                        by_item,
                        bin_used,
                        chosen,
                        weight + p,
                        best,
                    );
                    chosen.pop();
                    bin_used[j] = false;
                }
            }
        }
        let mut by_item = vec![Vec::new(); n_items];
        for &(i, j, p) in edges {
            by_item[i].push((j, p));
        }
        let mut best = (0.0, Vec::new());
        recurse(
            0,
            n_items,
            &by_item,
            &mut vec![false; n_bins],
            &mut Vec::new(),
            0.0,
            &mut best,
        );
        Matching {
            weight: best.0,
            pairs: best.1,
        }
    }

    #[test]
    fn empty_graph() {
        let g = graph(0, 0, &[]);
        assert_eq!(max_weight_matching(&g), Matching::empty());
    }

    #[test]
    fn two_by_two_complete() {
        let g = graph(2, 2, &[(0, 0, 3.0), (0, 1, 1.0), (1, 0, 2.0), (1, 1, 4.0)]);
        let m = max_weight_matching(&g);
        assert_eq!(m.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(m.weight, 7.0);
    }

    #[test]
    fn single_bin_argmax() {
        let g = graph(2, 1, &[(0, 0, 5.0), (1, 0, 9.0)]);
        let m = max_weight_matching(&g);
        assert_eq!(m.pairs, vec![(1, 0)]);
        assert_eq!(m.weight, 9.0);
    }

    #[test]
    fn zero_weight_edges_excluded() {
        let g = graph(2, 2, &[(0, 0, 0.0), (1, 1, 2.0)]);
        let m = max_weight_matching(&g);
        assert_eq!(m.pairs, vec![(1, 1)]);
        assert_eq!(m.weight, 2.0);
    }

    #[test]
    fn lexicographic_tie_break() {
        // both diagonals weigh 5; {(0,0),(1,1)} precedes {(0,1),(1,0)}
        let g = graph(2, 2, &[(0, 0, 2.0), (0, 1, 3.0), (1, 0, 2.0), (1, 1, 3.0)]);
        let m = max_weight_matching(&g);
        assert_eq!(m.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(m.weight, 5.0);
        // a singleton can beat a pair lexicographically
        let g = graph(2, 2, &[(0, 0, 5.0), (0, 1, 2.0), (1, 0, 3.0)]);
        let m = max_weight_matching(&g);
        assert_eq!(m.pairs, vec![(0, 0)]);
        assert_eq!(m.weight, 5.0);
    }

    #[test]
    fn build_graph_keeps_only_fitting_options() {
        use crate::instance::{Item, PackingOption, Variant};
        let items = vec![
            Item::new([(0, PackingOption::new(vec![2.0], 7.0))].into()),
            Item::new([(0, PackingOption::new(vec![1.0], 7.0))].into()),
        ];
        let inst = Instance::new(1, vec![vec![1.0]], items, Variant::General).unwrap();
        let g = build_graph(&inst);
        assert_eq!(g.edges(), &[(1, 0, 7.0)]);
    }

    #[test]
    fn matches_brute_force_on_fixed_cases() {
        let cases: Vec<(usize, usize, Vec<(usize, usize, f64)>)> = vec![
            (
                3,
                2,
                vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (2, 1, 1.0)],
            ),
            (
                3,
                3,
                vec![
                    (0, 0, 4.0),
                    (0, 2, 2.0),
                    (1, 0, 4.0),
                    (1, 1, 1.0),
                    (2, 1, 3.0),
                    (2, 2, 3.0),
                ],
            ),
            (
                4,
                2,
                vec![(0, 0, 2.5), (1, 0, 2.5), (2, 1, 2.5), (3, 1, 2.5)],
            ),
        ];
        for (n, m, edges) in cases {
            let got = max_weight_matching(&graph(n, m, &edges));
            let want = brute_force(n, m, &edges);
            assert_eq!(got.weight, want.weight, "edges {edges:?}");
            assert_eq!(got.pairs, want.pairs, "edges {edges:?}");
        }
    }

    #[test]
    fn monotone_under_added_item() {
        let edges = vec![(0, 0, 3.0), (1, 1, 2.0)];
        let before = max_weight_matching(&graph(2, 2, &edges));
        let mut more = edges.clone();
        more.push((2, 0, 9.0));
        let after = max_weight_matching(&graph(3, 2, &more));
        assert!(after.weight >= before.weight);
    }

    #[test]
    fn scaling_preserves_pairs() {
        let edges = vec![
            (0, 0, 1.5),
            (0, 1, 2.25),
            (1, 0, 2.25),
            (1, 1, 1.0),
            (2, 1, 0.5),
        ];
        let base = max_weight_matching(&graph(3, 2, &edges));
        for c in [0.5, 2.0, 4.0] {
            let scaled: Vec<_> = edges.iter().map(|&(i, j, p)| (i, j, p * c)).collect();
            let m = max_weight_matching(&graph(3, 2, &scaled));
            assert_eq!(m.pairs, base.pairs, "scale {c}");
            assert_eq!(m.weight, base.weight * c, "scale {c}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn prop_matches_brute_force(
            n in 1usize..6,
            m in 1usize..6,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..m {
                    if rng.random::<f64>() < 0.55 {
                        // kept dyadic so tied sums stay exact
                        let p = (rng.random::<u32>() % 9) as f64 * 0.25;
                        edges.push((i, j, p));
                    }
                }
            }
            let got = max_weight_matching(&graph(n, m, &edges));
            let want = brute_force(n, m, &edges);
            prop_assert_eq!(got.weight, want.weight);
            prop_assert_eq!(got.pairs, want.pairs);
        }

        #[test]
        fn prop_monotone_in_items(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 4;
            let m = 3;
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..m {
                    if rng.random::<f64>() < 0.6 {
                        edges.push((i, j, rng.random::<f64>() * 4.0));
                    }
                }
            }
            let all = max_weight_matching(&graph(n, m, &edges));
            let fewer: Vec<_> = edges.iter().filter(|e| e.0 < n - 1).copied().collect();
            let sub = max_weight_matching(&graph(n, m, &fewer));
            prop_assert!(all.weight >= sub.weight);
        }
    }
}
