//! Most-probable leadership sequences between diagram states and their
//! support in the observed state sequence.

use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicsDiagram;

/// How occurrences of a path are counted in the state sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OccurrenceCount {
    /// Fewest occurrences of any consecutive step of the path as a state change.
    #[default]
    MinStep,
    /// Occurrences of the whole path as a contiguous run in the sequence with
    /// repeated states collapsed.
    Contiguous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderPath {
    /// Diagram state indices from source to target.
    pub states: Vec<usize>,
    /// Sum of reciprocal transition probabilities along the path.
    pub cost: f64,
    pub occurrences: usize,
    pub support: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SequenceReport {
    /// Sorted by support, highest first.
    pub paths: Vec<LeaderPath>,
    /// Ordered pairs with no path in the diagram.
    pub unreachable: Vec<(usize, usize)>,
    /// Number of state changes in the sequence.
    pub changes: usize,
}

impl SequenceReport {
    pub fn best(&self) -> Option<&LeaderPath> {
        self.paths.first()
    }

    pub fn supports(&self) -> Vec<f64> {
        self.paths.iter().map(|p| p.support).collect()
    }
}

/// Number of positions where the state differs from its predecessor.
pub fn state_changes(seq: &[usize]) -> usize {
    seq.windows(2).filter(|w| w[0] != w[1]).count()
}

fn collapse(seq: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(seq.len());
    for &s in seq {
        if out.last() != Some(&s) {
            out.push(s);
        }
    }
    out
}

pub fn count_occurrences(path: &[usize], seq: &[usize], mode: OccurrenceCount) -> usize {
    if path.len() < 2 {
        return 0;
    }
    match mode {
        OccurrenceCount::MinStep => path
            .windows(2)
            .map(|step| seq.windows(2).filter(|w| w[0] == step[0] && w[1] == step[1]).count())
            .min()
            .unwrap_or(0),
        OccurrenceCount::Contiguous => {
            let runs = collapse(seq);
            runs.windows(path.len()).filter(|w| *w == path).count()
        }
    }
}

/// `occurrences * (|path| - 1) / changes`, zero when nothing changes.
pub fn path_support(path: &[usize], seq: &[usize], mode: OccurrenceCount) -> (usize, f64) {
    let changes = state_changes(seq);
    let nu = count_occurrences(path, seq, mode);
    if changes == 0 {
        return (nu, 0.0);
    }
    (nu, (nu * (path.len() - 1)) as f64 / changes as f64)
}

/// Single-source shortest paths on reciprocal transition probabilities.
///
/// Returns `(dist, prev)`. Equal tentative distances keep the first
/// predecessor found and the lowest-index node is settled first.
pub fn reciprocal_dijkstra(a_star: &[Vec<f64>], source: usize) -> (Vec<f64>, Vec<Option<usize>>) {
    let m = a_star.len();
    let mut dist = vec![f64::INFINITY; m];
    let mut prev = vec![None; m];
    let mut done = vec![false; m];
    dist[source] = 0.0;
    for _ in 0..m {
        let mut u = None;
        for v in 0..m {
            if !done[v] && dist[v].is_finite() && u.is_none_or(|w: usize| dist[v] < dist[w]) {
                u = Some(v);
            }
        }
        let Some(u) = u else { break };
        done[u] = true;
        for v in 0..m {
            let p = a_star[u][v];
            if v != u && p > 0.0 && !done[v] {
                let cand = dist[u] + 1.0 / p;
                if cand < dist[v] {
                    dist[v] = cand;
                    prev[v] = Some(u);
                }
            }
        }
    }
    (dist, prev)
}

fn trace(prev: &[Option<usize>], source: usize, target: usize) -> Vec<usize> {
    let mut path = vec![target];
    let mut cur = target;
    while cur != source {
        cur = prev[cur].expect("finite distance implies a predecessor chain");
        path.push(cur);
    }
    path.reverse();
    path
}

/// Finds the reciprocal-weight shortest path for every ordered pair of
/// distinct states and scores it against the encoded sequence.
pub fn mine_sequences(diagram: &DynamicsDiagram, seq: &[usize], mode: OccurrenceCount) -> SequenceReport {
    mine_sequences_on(&diagram.a_star, seq, mode)
}

/// Same as [`mine_sequences`] on a bare adjacency matrix.
pub fn mine_sequences_on(a_star: &[Vec<f64>], seq: &[usize], mode: OccurrenceCount) -> SequenceReport {
    let m = a_star.len();
    let mut report = SequenceReport {
        changes: state_changes(seq),
        ..Default::default()
    };
    for i in 0..m {
        let (dist, prev) = reciprocal_dijkstra(a_star, i);
        for j in 0..m {
            if i == j {
                continue;
            }
            if !dist[j].is_finite() {
                report.unreachable.push((i, j));
                continue;
            }
            let states = trace(&prev, i, j);
            let (occurrences, support) = path_support(&states, seq, mode);
            report.paths.push(LeaderPath {
                states,
                cost: dist[j],
                occurrences,
                support,
            });
        }
    }
    report.paths.sort_by(|a, b| {
        b.support
            .total_cmp(&a.support)
            .then_with(|| a.states.cmp(&b.states))
    });
    report
}
