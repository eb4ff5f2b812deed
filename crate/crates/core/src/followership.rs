//! Co-faction and lead-follow supports aggregated over a faction series.

use serde::{Deserialize, Serialize};

use crate::data::IndividualId;
use crate::error::{Error, Result};
use crate::faction::FactionSeries;

fn check_index(f: &FactionSeries, i: usize) -> Result<()> {
    if i < f.n {
        Ok(())
    } else {
        Err(Error::UnknownId(format!("index {i} (n = {})", f.n)))
    }
}

/// Fraction of all windows in which `i` and `j` share a faction.
pub fn csupp(f: &FactionSeries, i: usize, j: usize) -> Result<f64> {
    check_index(f, i)?;
    check_index(f, j)?;
    if f.is_empty() {
        return Ok(0.0);
    }
    let together = f
        .entries
        .iter()
        .filter(|w| w.iter().any(|fa| fa.contains(i) && fa.contains(j)))
        .count();
    Ok(together as f64 / f.len() as f64)
}

/// Fraction of all windows in which `i` belongs to the faction initiated by `j`.
pub fn lfsupp(f: &FactionSeries, i: usize, j: usize) -> Result<f64> {
    check_index(f, i)?;
    check_index(f, j)?;
    if f.is_empty() {
        return Ok(0.0);
    }
    let hits = f
        .entries
        .iter()
        .filter(|w| w.iter().any(|fa| fa.initiator == j && fa.contains(i)))
        .count();
    Ok(hits as f64 / f.len() as f64)
}

/// Symmetric `n x n` co-faction support matrix with a zero diagonal.
pub fn cofaction_matrix(f: &FactionSeries) -> Vec<Vec<f64>> {
    let n = f.n;
    let mut m = vec![vec![0.0; n]; n];
    if f.is_empty() {
        return m;
    }
    for window in &f.entries {
        for fa in window {
            for (a, &i) in fa.members.iter().enumerate() {
                for &j in &fa.members[a + 1..] {
                    m[i][j] += 1.0;
                    m[j][i] += 1.0;
                }
            }
        }
    }
    let t = f.len() as f64;
    m.iter_mut().flatten().for_each(|v| *v /= t);
    m
}

/// `m[i][j]` = lead-follow support of follower `i` towards initiator `j`.
pub fn leadfollow_matrix(f: &FactionSeries) -> Vec<Vec<f64>> {
    let n = f.n;
    let mut m = vec![vec![0.0; n]; n];
    if f.is_empty() {
        return m;
    }
    for window in &f.entries {
        for fa in window {
            for &i in &fa.members {
                m[i][fa.initiator] += 1.0;
            }
        }
    }
    let t = f.len() as f64;
    m.iter_mut().flatten().for_each(|v| *v /= t);
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedPair {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CofactionNetwork {
    pub ids: Vec<IndividualId>,
    pub threshold: f64,
    /// Full support matrix, zero diagonal.
    pub support: Vec<Vec<f64>>,
    /// Support matrix with entries below the threshold zeroed.
    pub adjacency: Vec<Vec<f64>>,
    /// Undirected edges with `a < b`.
    pub edges: Vec<WeightedPair>,
}

impl CofactionNetwork {
    pub fn n(&self) -> usize {
        self.ids.len()
    }
}

fn check_threshold(phi: f64) -> Result<()> {
    if phi.is_nan() || phi < 0.0 {
        return Err(Error::InvalidParameter(format!("threshold must be non-negative, got {phi}")));
    }
    Ok(())
}

/// Thresholds the co-faction supports; thresholds above one give no edges.
pub fn build_cofaction_network(f: &FactionSeries, ids: &[IndividualId], phi_co: f64) -> Result<CofactionNetwork> {
    check_threshold(phi_co)?;
    if ids.len() != f.n {
        return Err(Error::InvalidParameter(format!("{} ids for {} individuals", ids.len(), f.n)));
    }
    let support = cofaction_matrix(f);
    let n = f.n;
    let mut adjacency = vec![vec![0.0; n]; n];
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let w = support[a][b];
            if w >= phi_co {
                adjacency[a][b] = w;
                adjacency[b][a] = w;
                edges.push(WeightedPair { a, b, weight: w });
            }
        }
    }
    Ok(CofactionNetwork {
        ids: ids.to_vec(),
        threshold: phi_co,
        support,
        adjacency,
        edges,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadFollowEdge {
    pub follower: usize,
    pub leader: usize,
    pub weight: f64,
}

impl LeadFollowEdge {
    /// True for the initiator's support towards its own faction.
    pub fn is_self(&self) -> bool {
        self.follower == self.leader
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadFollowNetwork {
    pub ids: Vec<IndividualId>,
    pub threshold: f64,
    /// Full lead-follow support matrix, rows are followers.
    pub support: Vec<Vec<f64>>,
    /// Individuals that initiate a faction in at least one window.
    pub leaders: Vec<usize>,
    /// Individuals with at least one edge.
    pub followers: Vec<usize>,
    pub edges: Vec<LeadFollowEdge>,
}

/// Bipartite follower-to-initiator network. Edges to every leader in
/// `leaders` are kept when support reaches `phi_lf`; the initiator's own
/// support is included as a self edge.
pub fn build_leadfollow_network(f: &FactionSeries, ids: &[IndividualId], phi_lf: f64) -> Result<LeadFollowNetwork> {
    check_threshold(phi_lf)?;
    if ids.len() != f.n {
        return Err(Error::InvalidParameter(format!("{} ids for {} individuals", ids.len(), f.n)));
    }
    let n = f.n;
    let support = leadfollow_matrix(f);
    let mut is_leader = vec![false; n];
    for window in &f.entries {
        for fa in window {
            is_leader[fa.initiator] = true;
        }
    }
    let leaders: Vec<usize> = (0..n).filter(|&j| is_leader[j]).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for &j in &leaders {
            let w = support[i][j];
            if w > 0.0 && w >= phi_lf {
                edges.push(LeadFollowEdge { follower: i, leader: j, weight: w });
            }
        }
    }
    let mut followers: Vec<usize> = edges.iter().map(|e| e.follower).collect();
    followers.dedup();
    Ok(LeadFollowNetwork {
        ids: ids.to_vec(),
        threshold: phi_lf,
        support,
        leaders,
        followers,
        edges,
    })
}
