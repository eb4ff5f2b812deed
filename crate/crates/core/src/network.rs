//! Following networks: pairwise follow relations per window, inferred either
//! from DTW follow scores or from the heading/position baseline.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{windows, Dataset, IndividualId, Point, WindowSpec};
use crate::dtw::{follow_score, DtwBuffer, FollowScore, Kernel};
use crate::error::{Error, Result};

/// Directed follow edge: `from` follows `to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Follow relations among `n` individuals within one window.
///
/// At most one edge per unordered pair and no self-edges.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FollowingNetwork {
    pub n: usize,
    pub edges: Vec<Edge>,
}

impl FollowingNetwork {
    pub fn new(n: usize) -> Self {
        FollowingNetwork { n, edges: Vec::new() }
    }

    /// Builds a network, rejecting self-edges and duplicate pairs.
    pub fn from_edges(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for e in &edges {
            if e.from >= n || e.to >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge {}->{} out of range for {n} nodes",
                    e.from, e.to
                )));
            }
            if e.from == e.to {
                return Err(Error::InvalidParameter(format!("self-edge on node {}", e.from)));
            }
            if !seen.insert((e.from.min(e.to), e.from.max(e.to))) {
                return Err(Error::InvalidParameter(format!(
                    "pair ({}, {}) has more than one edge",
                    e.from, e.to
                )));
            }
        }
        Ok(FollowingNetwork { n, edges })
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.from] += 1;
        }
        d
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.to] += 1;
        }
        d
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<&Edge> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }
}

/// One following network per sliding window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicFollowingNetwork {
    pub ids: Vec<IndividualId>,
    pub windows: Vec<Range<usize>>,
    pub networks: Vec<FollowingNetwork>,
}

impl DynamicFollowingNetwork {
    pub fn len(&self) -> usize {
        self.networks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.networks.is_empty()
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }
}

/// Turns the score of the ordered pair `(u, q)` into an edge, if any.
///
/// `f >= sigma` means `q` follows `u`; `f <= -sigma` means `u` follows `q`.
pub fn follow_edge(u: usize, q: usize, score: FollowScore, sigma: f64) -> Option<Edge> {
    let f = score.value();
    if f >= sigma {
        Some(Edge { from: q, to: u, weight: f.abs() })
    } else if f <= -sigma {
        Some(Edge { from: u, to: q, weight: f.abs() })
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FollowingParams {
    pub sigma: f64,
    #[serde(default)]
    pub kernel: Kernel,
    /// Optional Sakoe-Chiba radius; `None` keeps DTW unconstrained.
    #[serde(default)]
    pub band: Option<usize>,
}

impl Default for FollowingParams {
    fn default() -> Self {
        FollowingParams {
            sigma: 0.5,
            kernel: Kernel::Euclidean,
            band: None,
        }
    }
}

impl FollowingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return Err(Error::InvalidParameter(format!("sigma={} must lie in (0, 1]", self.sigma)));
        }
        Ok(())
    }
}

/// Follow scores of every unordered pair `(a, b)`, `a < b`, over one window.
pub fn window_scores(
    ds: &Dataset,
    window: Range<usize>,
    params: &FollowingParams,
    buf: &mut DtwBuffer,
) -> Result<Vec<(usize, usize, FollowScore)>> {
    let n = ds.n();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        let pa = &ds.positions(a)[window.clone()];
        for b in a + 1..n {
            let pb = &ds.positions(b)[window.clone()];
            let path = buf.path_banded(pa, pb, params.kernel, params.band)?;
            out.push((a, b, follow_score(&path)));
        }
    }
    Ok(out)
}

pub fn build_dynamic_network(
    ds: &Dataset,
    spec: WindowSpec,
    params: &FollowingParams,
) -> Result<DynamicFollowingNetwork> {
    params.validate()?;
    let wins = windows(ds.len(), spec)?;
    let networks = wins
        .par_iter()
        .map_init(DtwBuffer::new, |buf, w| {
            let scores = window_scores(ds, w.clone(), params, buf)?;
            let edges = scores
                .into_iter()
                .filter_map(|(a, b, f)| follow_edge(a, b, f, params.sigma))
                .collect();
            Ok(FollowingNetwork { n: ds.n(), edges })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DynamicFollowingNetwork {
        ids: ds.ids(),
        windows: wins,
        networks,
    })
}

/// Parameters of the heading/position baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionParams {
    /// Maximum heading disagreement, in degrees.
    pub max_angle_deg: f64,
    /// Steps shorter than this are treated as stationary and cast no vote.
    pub min_displacement: f64,
    /// Fraction of a window's steps that must vote for an edge.
    pub majority: f64,
}

impl Default for DirectionParams {
    fn default() -> Self {
        DirectionParams {
            max_angle_deg: 90.0,
            min_displacement: 1e-9,
            majority: 0.5,
        }
    }
}

/// Does `i` follow `j` at this step? True when both move, their headings
/// agree within the threshold and `j` is ahead of `i` along `i`'s heading.
pub fn direction_vote(pi: Point, vi: Point, pj: Point, vj: Point, params: &DirectionParams) -> bool {
    let ni = vi.x.hypot(vi.y);
    let nj = vj.x.hypot(vj.y);
    if ni < params.min_displacement || nj < params.min_displacement {
        return false;
    }
    let cos = (vi.x * vj.x + vi.y * vj.y) / (ni * nj);
    if cos < params.max_angle_deg.to_radians().cos() {
        return false;
    }
    let ahead = (pj.x - pi.x) * vi.x + (pj.y - pi.y) * vi.y;
    ahead > 0.0
}

pub fn build_direction_network(
    ds: &Dataset,
    spec: WindowSpec,
    params: &DirectionParams,
) -> Result<DynamicFollowingNetwork> {
    let wins = windows(ds.len(), spec)?;
    let n = ds.n();
    let networks = wins
        .par_iter()
        .map(|w| {
            let steps = w.len().saturating_sub(1).max(1);
            let mut votes = vec![0usize; n * n];
            for t in w.start..w.end.saturating_sub(1) {
                for i in 0..n {
                    let pi = ds.positions(i)[t];
                    let next_i = ds.positions(i)[t + 1];
                    let vi = Point::new(next_i.x - pi.x, next_i.y - pi.y);
                    for j in 0..n {
                        if i == j {
                            continue;
                        }
                        let pj = ds.positions(j)[t];
                        let next_j = ds.positions(j)[t + 1];
                        let vj = Point::new(next_j.x - pj.x, next_j.y - pj.y);
                        if direction_vote(pi, vi, pj, vj, params) {
                            votes[i * n + j] += 1;
                        }
                    }
                }
            }
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    let (ij, ji) = (votes[i * n + j], votes[j * n + i]);
                    let (from, to, v) = if ij >= ji { (i, j, ij) } else { (j, i, ji) };
                    let frac = v as f64 / steps as f64;
                    if ij != ji && frac >= params.majority {
                        edges.push(Edge { from, to, weight: frac });
                    }
                }
            }
            FollowingNetwork { n, edges }
        })
        .collect();
    Ok(DynamicFollowingNetwork {
        ids: ds.ids(),
        windows: wins,
        networks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DatasetMeta, Trajectory};

    #[test]
    fn edge_thresholds() {
        assert_eq!(
            follow_edge(0, 1, FollowScore(0.6), 0.5),
            Some(Edge { from: 1, to: 0, weight: 0.6 })
        );
        assert_eq!(
            follow_edge(0, 1, FollowScore(0.5), 0.5),
            Some(Edge { from: 1, to: 0, weight: 0.5 })
        );
        assert_eq!(
            follow_edge(0, 1, FollowScore(-0.75), 0.5),
            Some(Edge { from: 0, to: 1, weight: 0.75 })
        );
        assert_eq!(follow_edge(0, 1, FollowScore(-0.49), 0.5), None);
    }

    #[test]
    fn from_edges_rejects_invalid_structure() {
        let e = |from, to| Edge { from, to, weight: 1.0 };
        assert!(FollowingNetwork::from_edges(3, vec![e(0, 1), e(2, 1)]).is_ok());
        assert!(FollowingNetwork::from_edges(3, vec![e(1, 1)]).is_err());
        assert!(FollowingNetwork::from_edges(3, vec![e(0, 1), e(1, 0)]).is_err());
        assert!(FollowingNetwork::from_edges(2, vec![e(0, 2)]).is_err());
    }

    fn ds_of(series: Vec<Vec<Point>>) -> Dataset {
        let trajectories = series
            .into_iter()
            .enumerate()
            .map(|(k, pts)| Trajectory::new(format!("{}", k + 1), 0, pts))
            .collect();
        Dataset::new(trajectories, DatasetMeta::default()).unwrap()
    }

    #[test]
    fn trailing_individual_follows_in_every_window() {
        // B replays A's wandering path five steps later.
        let a: Vec<Point> = (0..200)
            .map(|t| {
                let t = t as f64;
                Point::new(t + 3.0 * (t / 7.0).sin(), 2.0 * (t / 11.0).cos())
            })
            .collect();
        let b: Vec<Point> = (0..200).map(|t| a[t.max(5) - 5]).collect();
        let ds = ds_of(vec![a, b]);
        let dyn_net =
            build_dynamic_network(&ds, WindowSpec { omega: 40, delta: 4 }, &FollowingParams::default())
                .unwrap();
        assert_eq!(dyn_net.len(), 41);
        for net in &dyn_net.networks {
            assert_eq!(net.edges.len(), 1);
            assert_eq!((net.edges[0].from, net.edges[0].to), (1, 0));
        }
    }

    #[test]
    fn direction_votes() {
        let p = DirectionParams::default();
        let east = Point::new(1.0, 0.0);
        assert!(direction_vote(Point::new(0.0, 0.0), east, Point::new(5.0, 0.0), east, &p));
        assert!(!direction_vote(Point::new(5.0, 0.0), east, Point::new(0.0, 0.0), east, &p));
        let west = Point::new(-1.0, 0.0);
        assert!(!direction_vote(Point::new(0.0, 0.0), east, Point::new(5.0, 0.0), west, &p));
        assert!(!direction_vote(Point::new(0.0, 0.0), Point::default(), Point::new(5.0, 0.0), east, &p));
    }

    #[test]
    fn direction_network_points_at_front_runner() {
        let a: Vec<Point> = (0..30).map(|t| Point::new(t as f64 + 5.0, 0.0)).collect();
        let b: Vec<Point> = (0..30).map(|t| Point::new(t as f64, 0.0)).collect();
        let ds = ds_of(vec![a, b]);
        let net = build_direction_network(&ds, WindowSpec { omega: 10, delta: 10 }, &DirectionParams::default())
            .unwrap();
        for g in &net.networks {
            assert_eq!(g.edges, vec![Edge { from: 1, to: 0, weight: 1.0 }]);
        }
    }
}
