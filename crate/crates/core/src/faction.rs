//! Faction initiators and faction membership per window.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::IndividualId;
use crate::network::{DynamicFollowingNetwork, FollowingNetwork};

/// A set of individuals (by dataset index), kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LeaderSet(Vec<usize>);

impl LeaderSet {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        LeaderSet(v)
    }

    pub fn empty() -> Self {
        LeaderSet(Vec::new())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    /// Renders the set with dataset identifiers, e.g. `{2,3,4}`.
    pub fn label(&self, ids: &[IndividualId]) -> String {
        let parts: Vec<&str> = self.0.iter().map(|&k| ids[k].as_str()).collect();
        format!("{{{}}}", parts.join(","))
    }
}

impl fmt::Display for LeaderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Faction {
    pub initiator: usize,
    /// Sorted, includes the initiator.
    pub members: Vec<usize>,
}

impl Faction {
    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderSeries {
    pub entries: Vec<LeaderSet>,
}

impl LeaderSeries {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactionSeries {
    pub n: usize,
    pub entries: Vec<Vec<Faction>>,
}

impl FactionSeries {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Nodes with no outgoing follow edge and at least one follower.
pub fn find_initiators(g: &FollowingNetwork) -> LeaderSet {
    let out = g.out_degrees();
    let inn = g.in_degrees();
    LeaderSet::new((0..g.n).filter(|&v| out[v] == 0 && inn[v] > 0))
}

/// Best route found from a node to one initiator: summed weight, hop count.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Route {
    weight: f64,
    hops: usize,
}

impl Route {
    fn beats(self, other: Route) -> bool {
        self.weight > other.weight || (self.weight == other.weight && self.hops < other.hops)
    }
}

/// Assigns every node that reaches an initiator to exactly one faction.
///
/// A node reaching several initiators joins the one whose best route has the
/// largest summed edge weight, then the fewest hops, then the smallest index.
/// Routes are walks of at most `n - 1` hops, which on acyclic networks are
/// exactly the simple paths.
pub fn assign_factions(g: &FollowingNetwork) -> Vec<Faction> {
    let initiators = find_initiators(g);
    if initiators.is_empty() {
        return Vec::new();
    }
    let n = g.n;
    let mut best: Vec<Option<(Route, usize)>> = vec![None; n];

    for &leader in initiators.members() {
        // cur[v]: best weight over walks of exactly k hops from v to leader.
        let mut cur: Vec<Option<f64>> = vec![None; n];
        cur[leader] = Some(0.0);
        let mut reach: Vec<Option<Route>> = vec![None; n];
        reach[leader] = Some(Route { weight: 0.0, hops: 0 });
        for hops in 1..n {
            let mut next: Vec<Option<f64>> = vec![None; n];
            for e in &g.edges {
                if let Some(w) = cur[e.to] {
                    let cand = w + e.weight;
                    if next[e.from].is_none_or(|old| cand > old) {
                        next[e.from] = Some(cand);
                    }
                }
            }
            if next.iter().all(Option::is_none) {
                break;
            }
            for v in 0..n {
                if let Some(w) = next[v] {
                    let r = Route { weight: w, hops };
                    if reach[v].is_none_or(|old| r.beats(old)) {
                        reach[v] = Some(r);
                    }
                }
            }
            cur = next;
        }
        for v in 0..n {
            if let Some(r) = reach[v] {
                // Initiators are visited in increasing index order, so a
                // strict comparison keeps the smaller index on exact ties.
                if best[v].is_none_or(|(old, _)| r.beats(old)) {
                    best[v] = Some((r, leader));
                }
            }
        }
    }

    initiators
        .members()
        .iter()
        .map(|&leader| Faction {
            initiator: leader,
            members: (0..n)
                .filter(|&v| matches!(best[v], Some((_, l)) if l == leader))
                .collect(),
        })
        .collect()
}

pub fn leader_series(dyn_net: &DynamicFollowingNetwork) -> (LeaderSeries, FactionSeries) {
    let (leaders, factions): (Vec<_>, Vec<_>) = dyn_net
        .networks
        .par_iter()
        .map(|g| (find_initiators(g), assign_factions(g)))
        .unzip();
    (
        LeaderSeries { entries: leaders },
        FactionSeries {
            n: dyn_net.n(),
            entries: factions,
        },
    )
}
