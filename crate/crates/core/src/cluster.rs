//! Single-linkage clustering of co-faction profiles, dendrogram splitting and
//! partition scoring.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One agglomeration step. Leaves are `0..n`; the cluster created by merge `k`
/// has id `n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn heights(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.height).collect()
    }
}

/// Disjoint clusters of node indices, each sorted, ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub clusters: Vec<Vec<usize>>,
}

impl ClusterSet {
    pub fn new(mut clusters: Vec<Vec<usize>>) -> Self {
        clusters.retain(|c| !c.is_empty());
        for c in &mut clusters {
            c.sort_unstable();
        }
        clusters.sort();
        ClusterSet { clusters }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Cluster index of every node, or an error if this is not a partition of `0..n`.
    pub fn labels(&self, n: usize) -> Result<Vec<usize>> {
        let mut label = vec![usize::MAX; n];
        for (c, members) in self.clusters.iter().enumerate() {
            for &v in members {
                if v >= n {
                    return Err(Error::NotAPartition(format!("node {v} outside 0..{n}")));
                }
                if label[v] != usize::MAX {
                    return Err(Error::NotAPartition(format!("node {v} in two clusters")));
                }
                label[v] = c;
            }
        }
        if let Some(v) = label.iter().position(|&l| l == usize::MAX) {
            return Err(Error::NotAPartition(format!("node {v} not covered")));
        }
        Ok(label)
    }
}

pub(crate) fn check_square_symmetric(m: &[Vec<f64>]) -> Result<()> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(Error::MatrixNotSquare { rows: n, cols: row.len() });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if (m[i][j] - m[j][i]).abs() > 1e-12 {
                return Err(Error::AsymmetricMatrix(i, j));
            }
        }
    }
    Ok(())
}

/// Euclidean distances between rows of the support matrix, with every
/// diagonal entry taken as 1.
pub fn profile_distances(adj: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = adj.len();
    let entry = |i: usize, k: usize| if i == k { 1.0 } else { adj[i][k] };
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = (0..n).map(|k| (entry(i, k) - entry(j, k)).powi(2)).sum();
            d[i][j] = s.sqrt();
            d[j][i] = d[i][j];
        }
    }
    d
}

/// Agglomerative clustering with minimum linkage over row-profile distances.
///
/// Among equally close pairs the one with the lexicographically smallest
/// `(a, b)` cluster ids merges first.
pub fn single_linkage(adj: &[Vec<f64>]) -> Result<Dendrogram> {
    check_square_symmetric(adj)?;
    Ok(single_linkage_from_distances(&profile_distances(adj)))
}

pub fn single_linkage_from_distances(dist: &[Vec<f64>]) -> Dendrogram {
    let n = dist.len();
    // Active clusters: (id, size); d holds inter-cluster distances by slot.
    let mut active: Vec<(usize, usize)> = (0..n).map(|i| (i, 1)).collect();
    let mut d: Vec<Vec<f64>> = dist.to_vec();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    while active.len() > 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for x in 0..active.len() {
            for y in x + 1..active.len() {
                let (ia, ib) = (active[x].0.min(active[y].0), active[x].0.max(active[y].0));
                let h = d[x][y];
                let better = match best {
                    None => true,
                    Some((bh, ba, bb, _, _)) => h < bh || (h == bh && (ia, ib) < (ba, bb)),
                };
                if better {
                    best = Some((h, ia, ib, x, y));
                }
            }
        }
        let (h, a, b, x, y) = best.expect("at least two active clusters");
        let size = active[x].1 + active[y].1;
        merges.push(Merge { a, b, height: h, size });
        // Slot x becomes the new cluster, slot y is removed.
        for z in 0..active.len() {
            let v = d[x][z].min(d[y][z]);
            d[x][z] = v;
            d[z][x] = v;
        }
        d[x][x] = 0.0;
        active[x] = (n + merges.len() - 1, size);
        active.remove(y);
        d.remove(y);
        for row in &mut d {
            row.remove(y);
        }
    }
    Dendrogram { n, merges }
}

/// Heights closer together than this count as a single group.
pub const DEGENERATE_SPREAD: f64 = 1e-12;

/// Two-means split of merge heights. Returns `true` for internal merges
/// (the lower centroid's group).
///
/// Lloyd iterations start from the minimum and maximum height. Fewer than two
/// merges, or heights spread by at most `min_spread`, make every merge internal.
pub fn split_edges_kmeans(heights: &[f64], min_spread: f64) -> Vec<bool> {
    if heights.len() < 2 {
        return vec![true; heights.len()];
    }
    let lo = heights.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= min_spread {
        return vec![true; heights.len()];
    }
    let (mut c1, mut c2) = (lo, hi);
    let mut assign: Vec<bool> = Vec::new();
    for _ in 0..100 {
        let next: Vec<bool> = heights.iter().map(|&h| (h - c1).abs() <= (h - c2).abs()).collect();
        if next == assign {
            break;
        }
        assign = next;
        let mean = |want: bool| {
            let (s, k) = heights
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == want)
                .fold((0.0, 0usize), |(s, k), (&h, _)| (s + h, k + 1));
            if k == 0 {
                None
            } else {
                Some(s / k as f64)
            }
        };
        c1 = mean(true).unwrap_or(c1);
        c2 = mean(false).unwrap_or(c2);
    }
    assign
}

/// Connected components of the leaves under the internal merges.
pub fn extract_clusters(d: &Dendrogram, internal: &[bool]) -> ClusterSet {
    let n = d.n;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    // Any leaf of each cluster id serves as its representative.
    let mut rep: Vec<usize> = (0..n).collect();
    for (k, m) in d.merges.iter().enumerate() {
        let (ra, rb) = (rep[m.a], rep[m.b]);
        if internal.get(k).copied().unwrap_or(false) {
            let (x, y) = (find(&mut parent, ra), find(&mut parent, rb));
            if x != y {
                parent[x.max(y)] = x.min(y);
            }
        }
        rep.push(ra);
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        let r = find(&mut parent, v);
        groups[r].push(v);
    }
    ClusterSet::new(groups)
}

/// Everything produced by one clustering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub dendrogram: Dendrogram,
    pub internal: Vec<bool>,
    pub clusters: ClusterSet,
}

pub fn cluster_cofaction(support: &[Vec<f64>], min_spread: f64) -> Result<Clustering> {
    let dendrogram = single_linkage(support)?;
    let internal = split_edges_kmeans(&dendrogram.heights(), min_spread);
    let clusters = extract_clusters(&dendrogram, &internal);
    Ok(Clustering {
        dendrogram,
        internal,
        clusters,
    })
}

/// Weighted modularity, `sum_c e_cc - a_c^2`. Zero for a graph without edge mass.
pub fn modularity(adj: &[Vec<f64>], clusters: &ClusterSet) -> Result<f64> {
    check_square_symmetric(adj)?;
    let n = adj.len();
    let label = clusters.labels(n)?;
    let total: f64 = adj.iter().flatten().sum();
    if total <= 0.0 {
        return Ok(0.0);
    }
    let k = clusters.len();
    let mut e = vec![0.0; k];
    let mut a = vec![0.0; k];
    for i in 0..n {
        for j in 0..n {
            let w = adj[i][j];
            a[label[i]] += w;
            if label[i] == label[j] {
                e[label[i]] += w;
            }
        }
    }
    Ok((0..k).map(|c| e[c] / total - (a[c] / total).powi(2)).sum())
}

/// F1 from a greedy one-to-one matching of truth to predicted clusters by
/// descending overlap (ties: smaller truth index, then smaller predicted index).
pub fn cluster_f1(predicted: &ClusterSet, truth: &ClusterSet) -> f64 {
    let mut pairs = Vec::new();
    for (t, tc) in truth.clusters.iter().enumerate() {
        for (p, pc) in predicted.clusters.iter().enumerate() {
            let overlap = tc.iter().filter(|v| pc.binary_search(v).is_ok()).count();
            if overlap > 0 {
                pairs.push((overlap, t, p));
            }
        }
    }
    pairs.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_t = vec![false; truth.len()];
    let mut used_p = vec![false; predicted.len()];
    let mut tp = 0usize;
    for (o, t, p) in pairs {
        if !used_t[t] && !used_p[p] {
            used_t[t] = true;
            used_p[p] = true;
            tp += o;
        }
    }
    let pred_total: usize = predicted.clusters.iter().map(Vec::len).sum();
    let truth_total: usize = truth.clusters.iter().map(Vec::len).sum();
    let (fp, fn_) = (pred_total - tp, truth_total - tp);
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        1.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}
