//! Strategies, oracles and per-case checks shared by the property and
//! acceptance suites.

#![allow(dead_code)]

use std::collections::HashMap;

use leadfollow::cluster::{
    modularity, profile_distances, single_linkage, single_linkage_from_distances, ClusterSet, Merge,
};
use leadfollow::dtw::{dtw_path, follow_score, Kernel, WarpingPath};
use leadfollow::dynamics::{bigram_mle, fit_diagram, leader_set_supports, FitOptions, LeaderSetSupport};
use leadfollow::faction::{assign_factions, FactionSeries, LeaderSeries, LeaderSet};
use leadfollow::followership::{cofaction_matrix, csupp, leadfollow_matrix, lfsupp};
use leadfollow::network::{Edge, FollowingNetwork};
use leadfollow::significance::{permute_leader_series, rewire_diagram, seeded_rng};
use leadfollow::stats::{ks_test, ranksum_p, RanksumMethod};
use leadfollow::Point;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type CaseResult = Result<(), TestCaseError>;

// ---- DTW ----

fn segment(len: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), len)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(x, y)).collect())
}

pub fn segment_pair(max: usize) -> impl Strategy<Value = (Vec<Point>, Vec<Point>)> {
    (1..=max).prop_flat_map(|len| (segment(len), segment(len)))
}

/// Top-down recursion over the same recurrence, memoised.
fn memo_cost(p: &[Point], q: &[Point]) -> f64 {
    fn go(i: usize, j: usize, p: &[Point], q: &[Point], memo: &mut HashMap<(usize, usize), f64>) -> f64 {
        if let Some(&c) = memo.get(&(i, j)) {
            return c;
        }
        let d = Kernel::Euclidean.eval(p[i], q[j]);
        let best = match (i, j) {
            (0, 0) => 0.0,
            (0, _) => go(0, j - 1, p, q, memo),
            (_, 0) => go(i - 1, 0, p, q, memo),
            _ => go(i - 1, j - 1, p, q, memo)
                .min(go(i - 1, j, p, q, memo))
                .min(go(i, j - 1, p, q, memo)),
        };
        let c = d + best;
        memo.insert((i, j), c);
        c
    }
    go(p.len() - 1, q.len() - 1, p, q, &mut HashMap::new())
}

/// Minimum summed cost over every monotone path, by exhaustive enumeration.
fn enumerate_min(p: &[Point], q: &[Point]) -> f64 {
    fn walk(i: usize, j: usize, acc: f64, p: &[Point], q: &[Point]) -> f64 {
        let acc = acc + Kernel::Euclidean.eval(p[i], q[j]);
        let (n, m) = (p.len() - 1, q.len() - 1);
        if i == n && j == m {
            return acc;
        }
        let mut best = f64::INFINITY;
        if i < n && j < m {
            best = best.min(walk(i + 1, j + 1, acc, p, q));
        }
        if i < n {
            best = best.min(walk(i + 1, j, acc, p, q));
        }
        if j < m {
            best = best.min(walk(i, j + 1, acc, p, q));
        }
        best
    }
    walk(0, 0, 0.0, p, q)
}

pub fn dtw_memo_case((p, q): (Vec<Point>, Vec<Point>)) -> CaseResult {
    let path = dtw_path(&p, &q, Kernel::Euclidean).unwrap();
    prop_assert_eq!(path.cost, memo_cost(&p, &q));
    let last = p.len() - 1;
    prop_assert_eq!(path.pairs.first(), Some(&(0, 0)));
    prop_assert_eq!(path.pairs.last(), Some(&(last, last)));
    for w in path.pairs.windows(2) {
        let (di, dj) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
        prop_assert!(di <= 1 && dj <= 1 && di + dj >= 1, "bad step {:?}", w);
    }
    let along: f64 = path.pairs.iter().map(|&(i, j)| Kernel::Euclidean.eval(p[i], q[j])).sum();
    prop_assert!((along - path.cost).abs() <= 1e-9 * path.cost.max(1.0));
    Ok(())
}

pub fn dtw_enumeration_case((p, q): (Vec<Point>, Vec<Point>)) -> CaseResult {
    let path = dtw_path(&p, &q, Kernel::Euclidean).unwrap();
    let best = enumerate_min(&p, &q);
    prop_assert!((path.cost - best).abs() <= 1e-9 * best.max(1.0), "{} vs {}", path.cost, best);
    Ok(())
}

// ---- follow score ----

/// Monotone lattice path from (0, 0) to (len-1, len-1) driven by `steps`
/// (0 diagonal, 1 down, 2 right), completed greedily once they run out.
fn lattice_path(len: usize, steps: &[u8]) -> WarpingPath {
    let last = len - 1;
    let (mut i, mut j) = (0, 0);
    let mut pairs = vec![(0, 0)];
    let mut it = steps.iter();
    while i < last || j < last {
        match it.next().copied().unwrap_or(0) {
            0 if i < last && j < last => {
                i += 1;
                j += 1;
            }
            1 if i < last => i += 1,
            2 if j < last => j += 1,
            _ if i < last => i += 1,
            _ => j += 1,
        }
        pairs.push((i, j));
    }
    WarpingPath { pairs, cost: 0.0 }
}

pub fn lattice_steps() -> impl Strategy<Value = (usize, Vec<u8>)> {
    (1usize..40, prop::collection::vec(0u8..3, 0..80))
}

pub fn follow_score_case((len, steps): (usize, Vec<u8>)) -> CaseResult {
    let path = lattice_path(len, &steps);
    let f = follow_score(&path).value();
    prop_assert!((-1.0..=1.0).contains(&f));
    prop_assert_eq!(follow_score(&path.transposed()).value(), -f);
    Ok(())
}

// ---- diagram fitting ----

pub fn state_sequence() -> impl Strategy<Value = (usize, Vec<usize>)> {
    (2usize..6).prop_flat_map(|m| (Just(m), prop::collection::vec(0..m, 20..200))).prop_map(|(m, body)| {
        // Every state appears and every state has an outgoing transition.
        let mut seq: Vec<usize> = (0..m).collect();
        seq.extend(body);
        seq.push(0);
        (m, seq)
    })
}

fn singletons(m: usize) -> Vec<LeaderSetSupport> {
    (0..m)
        .map(|k| LeaderSetSupport {
            set: LeaderSet::new([k]),
            supp: 1.0 / m as f64,
        })
        .collect()
}

pub fn baum_welch_case((m, seq): (usize, Vec<usize>)) -> CaseResult {
    let d = fit_diagram(&seq, &singletons(m), FitOptions::default()).unwrap();
    let mle = bigram_mle(&seq, m);
    let dev = d.a.iter().flatten().zip(mle.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    prop_assert!(dev <= 1e-6, "deviation {}", dev);
    for (i, row) in d.a_star.iter().enumerate() {
        prop_assert_eq!(row[i], 0.0);
        let s: f64 = row.iter().sum();
        if seq.windows(2).any(|w| w[0] == i && w[1] != i) {
            prop_assert!((s - 1.0).abs() <= 1e-9, "row {} sums to {}", i, s);
        } else {
            prop_assert_eq!(s, 0.0);
        }
    }
    Ok(())
}

// ---- supports ----

pub fn leader_series(n: usize) -> impl Strategy<Value = LeaderSeries> {
    prop::collection::vec(prop::collection::vec(0..n, 0..3), 1..120)
        .prop_map(|v| LeaderSeries { entries: v.into_iter().map(LeaderSet::new).collect() })
}

/// Random following network: each pair gets no edge or one edge either way.
fn network(n: usize) -> impl Strategy<Value = FollowingNetwork> {
    let pairs = n * (n - 1) / 2;
    prop::collection::vec((0u8..3, 0.5..1.0f64), pairs).prop_map(move |choice| {
        let mut edges = Vec::new();
        let mut k = 0;
        for a in 0..n {
            for b in a + 1..n {
                let (c, weight) = choice[k];
                k += 1;
                match c {
                    1 => edges.push(Edge { from: a, to: b, weight }),
                    2 => edges.push(Edge { from: b, to: a, weight }),
                    _ => {}
                }
            }
        }
        FollowingNetwork::from_edges(n, edges).unwrap()
    })
}

pub fn faction_series() -> impl Strategy<Value = FactionSeries> {
    (2usize..8).prop_flat_map(|n| {
        prop::collection::vec(network(n), 1..20).prop_map(move |nets| FactionSeries {
            n,
            entries: nets.iter().map(assign_factions).collect(),
        })
    })
}

pub fn leader_support_case(series: LeaderSeries) -> CaseResult {
    let total: f64 = leader_set_supports(&series).iter().map(|s| s.supp).sum();
    prop_assert!((total - 1.0).abs() <= 1e-12);
    Ok(())
}

pub fn followership_case(f: FactionSeries) -> CaseResult {
    let co = cofaction_matrix(&f);
    let lf = leadfollow_matrix(&f);
    for i in 0..f.n {
        for j in 0..f.n {
            prop_assert_eq!(co[i][j], co[j][i]);
            prop_assert_eq!(csupp(&f, i, j).unwrap(), csupp(&f, j, i).unwrap());
        }
        let loyalty: f64 = (0..f.n).map(|j| lfsupp(&f, i, j).unwrap()).sum();
        prop_assert!(loyalty <= 1.0 + 1e-12, "follower {}: {}", i, loyalty);
        let row: f64 = lf[i].iter().sum();
        prop_assert!(row <= 1.0 + 1e-12);
    }
    Ok(())
}

// ---- null models ----

pub fn permutation_case((series, seed): (LeaderSeries, u64)) -> CaseResult {
    let p = permute_leader_series(&series, &mut seeded_rng(seed));
    prop_assert_eq!(leader_set_supports(&p), leader_set_supports(&series));
    Ok(())
}

pub fn rewiring_case(((m, seq), seed): ((usize, Vec<usize>), u64)) -> CaseResult {
    let d = fit_diagram(&seq, &singletons(m), FitOptions::default()).unwrap();
    let r = rewire_diagram(&d, &mut seeded_rng(seed));
    prop_assert_eq!(&r.states, &d.states);
    prop_assert_eq!(&r.supports, &d.supports);
    prop_assert_eq!(r.edges().len(), d.edges().len());
    let sorted = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v
    };
    prop_assert_eq!(sorted(r.edge_weights()), sorted(d.edge_weights()));
    for i in 0..m {
        prop_assert_eq!(r.a_star[i][i], 0.0);
        let out = |x: &[Vec<f64>]| sorted(x[i].iter().copied().filter(|&w| w > 0.0).collect());
        prop_assert_eq!(out(&r.a_star), out(&d.a_star));
    }
    Ok(())
}

// ---- nonparametric tests ----

/// Two-sample KS distance straight from the empirical CDFs.
fn ecdf_distance(x: &[f64], y: &[f64]) -> f64 {
    let (n, m) = (x.len() as f64, y.len() as f64);
    x.iter()
        .chain(y)
        .map(|&v| {
            let fx = x.iter().filter(|&&a| a <= v).count();
            let fy = y.iter().filter(|&&b| b <= v).count();
            (fx as f64 / n - fy as f64 / m).abs()
        })
        .fold(0.0, f64::max)
}

/// Samples on a coarse grid so ties are common.
pub fn tied_samples() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(0u8..12, 1..30),
        prop::collection::vec(0u8..12, 1..30),
        0.1..3.0f64,
    )
        .prop_map(|(x, y, scale)| {
            let grid = |v: Vec<u8>| v.into_iter().map(|k| f64::from(k) * scale).collect();
            (grid(x), grid(y))
        })
}

pub fn ks_case((x, y): (Vec<f64>, Vec<f64>)) -> CaseResult {
    prop_assert_eq!(ks_test(&x, &y, 0.05).unwrap().statistic, ecdf_distance(&x, &y));
    Ok(())
}

pub fn small_samples() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        (8usize..=10).prop_flat_map(|n| prop::collection::vec(-5.0..5.0f64, n)),
        (8usize..=10).prop_flat_map(|n| prop::collection::vec(-4.0..6.0f64, n)),
    )
}

pub fn ranksum_case((x, y): (Vec<f64>, Vec<f64>)) -> CaseResult {
    let (u1, exact) = ranksum_p(&x, &y, RanksumMethod::Exact).unwrap();
    let (u2, normal) = ranksum_p(&x, &y, RanksumMethod::Normal).unwrap();
    prop_assert_eq!(u1, u2);
    prop_assert!((exact - normal).abs() <= 0.05, "exact {} normal {}", exact, normal);
    Ok(())
}

// ---- clustering ----

/// Cluster ids follow the dendrogram convention: leaves `0..n`, merge `k`
/// creates `n + k`. Each step scans every pair of clusters and every pair of
/// members.
fn naive_single_linkage(dist: &[Vec<f64>]) -> Vec<Merge> {
    let n = dist.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::new();
    while clusters.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for x in &clusters {
            for y in &clusters {
                if x.0 >= y.0 {
                    continue;
                }
                let h = x
                    .1
                    .iter()
                    .flat_map(|&i| y.1.iter().map(move |&j| dist[i][j]))
                    .fold(f64::INFINITY, f64::min);
                if best.is_none_or(|(bh, ba, bb)| h < bh || (h == bh && (x.0, y.0) < (ba, bb))) {
                    best = Some((h, x.0, y.0));
                }
            }
        }
        let (h, a, b) = best.unwrap();
        let xa = clusters.iter().position(|c| c.0 == a).unwrap();
        let mut members = clusters.remove(xa).1;
        let xb = clusters.iter().position(|c| c.0 == b).unwrap();
        members.extend(clusters.remove(xb).1);
        merges.push(Merge { a, b, height: h, size: members.len() });
        clusters.push((n + merges.len() - 1, members));
    }
    merges
}

/// Symmetric matrix with zero diagonal and entries on a grid of `levels` steps.
pub fn symmetric(n: usize, levels: u8) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(0..levels, n * (n - 1) / 2).prop_map(move |v| {
        let mut m = vec![vec![0.0; n]; n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                m[i][j] = f64::from(v[k]) / f64::from(levels);
                m[j][i] = m[i][j];
                k += 1;
            }
        }
        m
    })
}

pub fn linkage_case(dist: Vec<Vec<f64>>) -> CaseResult {
    let d = single_linkage_from_distances(&dist);
    prop_assert_eq!(d.merges, naive_single_linkage(&dist));
    Ok(())
}

pub fn profile_linkage_case(support: Vec<Vec<f64>>) -> CaseResult {
    let d = single_linkage(&support).unwrap();
    prop_assert_eq!(d.merges, naive_single_linkage(&profile_distances(&support)));
    Ok(())
}

pub fn single_cluster_case(adj: Vec<Vec<f64>>) -> CaseResult {
    let all = ClusterSet::new(vec![(0..adj.len()).collect()]);
    prop_assert_eq!(modularity(&adj, &all).unwrap(), 0.0);
    Ok(())
}

/// Modularity of two disjoint unit-weight cliques of size `k`, split along
/// the cliques.
pub fn two_clique_modularity(k: usize) -> f64 {
    let n = 2 * k;
    let adj: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i != j && i / k == j / k { 1.0 } else { 0.0 }).collect())
        .collect();
    let parts = ClusterSet::new(vec![(0..k).collect(), (k..n).collect()]);
    modularity(&adj, &parts).unwrap()
}
