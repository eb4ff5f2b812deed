//! On-disk artifact formats: JSON lines for per-window series, JSON and DOT
//! for diagrams and clusters, CSV for matrices and dendrograms.
//!
//! Individuals are written by identifier, never by index, so artifacts stay
//! readable on their own. Every reader accepts what the matching writer emits.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterSet, Dendrogram};
use crate::data::IndividualId;
use crate::dynamics::DynamicsDiagram;
use crate::error::{Error, Result};
use crate::faction::{Faction, FactionSeries, LeaderSeries, LeaderSet};
use crate::followership::LeadFollowNetwork;
use crate::network::{DynamicFollowingNetwork, Edge, FollowingNetwork};
use crate::sequence::SequenceReport;

fn io_err(e: std::io::Error) -> Error {
    Error::io("<stream>", e)
}

fn index_map(ids: &[IndividualId]) -> HashMap<&str, usize> {
    ids.iter().enumerate().map(|(k, id)| (id.as_str(), k)).collect()
}

fn lookup(map: &HashMap<&str, usize>, id: &IndividualId) -> Result<usize> {
    map.get(id.as_str()).copied().ok_or_else(|| Error::UnknownId(id.to_string()))
}

fn write_line<W: Write, T: Serialize>(w: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n").map_err(io_err)
}

/// Non-empty lines of a JSON-lines stream, parsed lazily.
fn lines<R: BufRead>(r: R) -> impl Iterator<Item = Result<String>> {
    r.lines()
        .map(|l| l.map_err(io_err))
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
}

fn parse<T: DeserializeOwned>(line: &str) -> Result<T> {
    Ok(serde_json::from_str(line)?)
}

/// First line of every JSON-lines artifact: the individuals, in index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub ids: Vec<IndividualId>,
}

fn read_header<I: Iterator<Item = Result<String>>>(it: &mut I) -> Result<Vec<IndividualId>> {
    let first = it.next().ok_or_else(|| Error::Malformed("empty artifact".into()))??;
    let h: Header = parse(&first)?;
    Ok(h.ids)
}

fn check_index(k: usize, expected: usize) -> Result<()> {
    if k == expected {
        Ok(())
    } else {
        Err(Error::Malformed(format!("window {k} found where {expected} was expected")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IdEdge {
    from: IndividualId,
    to: IndividualId,
    weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct NetworkRecord {
    window_index: usize,
    start: usize,
    end: usize,
    edges: Vec<IdEdge>,
}

pub fn write_network_jsonl<W: Write>(net: &DynamicFollowingNetwork, mut w: W) -> Result<()> {
    write_line(&mut w, &Header { ids: net.ids.clone() })?;
    for (k, (g, range)) in net.networks.iter().zip(&net.windows).enumerate() {
        let edges = g
            .edges
            .iter()
            .map(|e| IdEdge {
                from: net.ids[e.from].clone(),
                to: net.ids[e.to].clone(),
                weight: e.weight,
            })
            .collect();
        let rec = NetworkRecord {
            window_index: k,
            start: range.start,
            end: range.end,
            edges,
        };
        write_line(&mut w, &rec)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_network_jsonl<R: BufRead>(r: R) -> Result<DynamicFollowingNetwork> {
    let mut it = lines(r);
    let ids = read_header(&mut it)?;
    let map = index_map(&ids);
    let n = ids.len();
    let mut windows = Vec::new();
    let mut networks = Vec::new();
    for (k, line) in it.enumerate() {
        let rec: NetworkRecord = parse(&line?)?;
        check_index(rec.window_index, k)?;
        let edges = rec
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    from: lookup(&map, &e.from)?,
                    to: lookup(&map, &e.to)?,
                    weight: e.weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        networks.push(FollowingNetwork::from_edges(n, edges).map_err(|e| Error::Malformed(e.to_string()))?);
        windows.push(rec.start..rec.end);
    }
    Ok(DynamicFollowingNetwork { ids, windows, networks })
}

/// One window's following network as a DOT digraph, edges pointing from
/// follower to followed.
pub fn network_dot(net: &DynamicFollowingNetwork, window: usize) -> Result<String> {
    let g = net
        .networks
        .get(window)
        .ok_or_else(|| Error::InvalidParameter(format!("window {window} out of range ({} windows)", net.len())))?;
    let mut s = format!("digraph window_{window} {{\n");
    for id in &net.ids {
        let _ = writeln!(s, "  \"{id}\";");
    }
    for e in &g.edges {
        let _ = writeln!(s, "  \"{}\" -> \"{}\" [weight={:.4}];", net.ids[e.from], net.ids[e.to], e.weight);
    }
    s.push_str("}\n");
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LeaderRecord {
    window_index: usize,
    leaders: Vec<IndividualId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IdFaction {
    initiator: IndividualId,
    members: Vec<IndividualId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FactionRecord {
    window_index: usize,
    factions: Vec<IdFaction>,
}

fn names(ids: &[IndividualId], members: &[usize]) -> Vec<IndividualId> {
    members.iter().map(|&k| ids[k].clone()).collect()
}

fn indices(map: &HashMap<&str, usize>, members: &[IndividualId]) -> Result<Vec<usize>> {
    members.iter().map(|id| lookup(map, id)).collect()
}

pub fn write_leaders_jsonl<W: Write>(series: &LeaderSeries, ids: &[IndividualId], mut w: W) -> Result<()> {
    write_line(&mut w, &Header { ids: ids.to_vec() })?;
    for (k, set) in series.entries.iter().enumerate() {
        let rec = LeaderRecord {
            window_index: k,
            leaders: names(ids, set.members()),
        };
        write_line(&mut w, &rec)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_leaders_jsonl<R: BufRead>(r: R) -> Result<(Vec<IndividualId>, LeaderSeries)> {
    let mut it = lines(r);
    let ids = read_header(&mut it)?;
    let map = index_map(&ids);
    let mut entries = Vec::new();
    for (k, line) in it.enumerate() {
        let rec: LeaderRecord = parse(&line?)?;
        check_index(rec.window_index, k)?;
        entries.push(LeaderSet::new(indices(&map, &rec.leaders)?));
    }
    Ok((ids, LeaderSeries { entries }))
}

pub fn write_factions_jsonl<W: Write>(f: &FactionSeries, ids: &[IndividualId], mut w: W) -> Result<()> {
    write_line(&mut w, &Header { ids: ids.to_vec() })?;
    for (k, window) in f.entries.iter().enumerate() {
        let factions = window
            .iter()
            .map(|fa| IdFaction {
                initiator: ids[fa.initiator].clone(),
                members: names(ids, &fa.members),
            })
            .collect();
        write_line(&mut w, &FactionRecord { window_index: k, factions })?;
    }
    w.flush().map_err(io_err)
}

pub fn read_factions_jsonl<R: BufRead>(r: R) -> Result<(Vec<IndividualId>, FactionSeries)> {
    let mut it = lines(r);
    let ids = read_header(&mut it)?;
    let map = index_map(&ids);
    let mut entries = Vec::new();
    for (k, line) in it.enumerate() {
        let rec: FactionRecord = parse(&line?)?;
        check_index(rec.window_index, k)?;
        let window = rec
            .factions
            .iter()
            .map(|fa| {
                let mut members = indices(&map, &fa.members)?;
                members.sort_unstable();
                Ok(Faction {
                    initiator: lookup(&map, &fa.initiator)?,
                    members,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        entries.push(window);
    }
    let n = ids.len();
    Ok((ids, FactionSeries { n, entries }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramNode {
    pub set: Vec<IndividualId>,
    pub label: String,
    pub supp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramEdgeDoc {
    /// Node indices.
    pub from: usize,
    pub to: usize,
    pub prob: f64,
}

/// Diagram as written to disk. `nodes` and `edges` describe the picture;
/// the remaining fields let the fitted model be reloaded exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramDoc {
    pub ids: Vec<IndividualId>,
    pub nodes: Vec<DiagramNode>,
    pub edges: Vec<DiagramEdgeDoc>,
    pub a: Vec<Vec<f64>>,
    pub a_star: Vec<Vec<f64>>,
    pub pi: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
}

impl DiagramDoc {
    pub fn new(d: &DynamicsDiagram, ids: &[IndividualId]) -> Self {
        let nodes = d
            .states
            .iter()
            .zip(&d.supports)
            .map(|(s, &supp)| DiagramNode {
                set: names(ids, s.members()),
                label: s.label(ids),
                supp,
            })
            .collect();
        let edges = d
            .edges()
            .into_iter()
            .map(|e| DiagramEdgeDoc {
                from: e.from,
                to: e.to,
                prob: e.prob,
            })
            .collect();
        DiagramDoc {
            ids: ids.to_vec(),
            nodes,
            edges,
            a: d.a.clone(),
            a_star: d.a_star.clone(),
            pi: d.pi.clone(),
            log_likelihood: d.log_likelihood,
            iterations: d.iterations,
        }
    }

    pub fn to_diagram(&self) -> Result<DynamicsDiagram> {
        let map = index_map(&self.ids);
        let m = self.nodes.len();
        let square = |x: &Vec<Vec<f64>>| x.len() == m && x.iter().all(|r| r.len() == m);
        if !square(&self.a) || !square(&self.a_star) || self.pi.len() != m {
            return Err(Error::Malformed(format!("diagram matrices do not match {m} nodes")));
        }
        let states = self
            .nodes
            .iter()
            .map(|n| Ok(LeaderSet::new(indices(&map, &n.set)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DynamicsDiagram {
            states,
            supports: self.nodes.iter().map(|n| n.supp).collect(),
            a: self.a.clone(),
            a_star: self.a_star.clone(),
            pi: self.pi.clone(),
            log_likelihood: self.log_likelihood,
            iterations: self.iterations,
        })
    }
}

/// DOT rendering: nodes carry the leader set and its support, edges the
/// normalised transition probability.
pub fn diagram_dot(d: &DynamicsDiagram, ids: &[IndividualId]) -> String {
    let mut s = String::from("digraph leadership {\n  node [shape=ellipse];\n");
    for (k, (set, supp)) in d.states.iter().zip(&d.supports).enumerate() {
        let _ = writeln!(s, "  s{k} [label=\"{}\\n{supp:.3}\"];", set.label(ids));
    }
    for e in d.edges() {
        let _ = writeln!(s, "  s{} -> s{} [label=\"{:.3}\"];", e.from, e.to, e.prob);
    }
    s.push_str("}\n");
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceEntry {
    pub sequence: Vec<String>,
    pub states: Vec<usize>,
    pub cost: f64,
    pub occurrences: usize,
    pub supp_path: f64,
}

/// Leadership sequences, highest support first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceDoc {
    pub changes: usize,
    pub sequences: Vec<SequenceEntry>,
    pub unreachable: Vec<(String, String)>,
}

impl SequenceDoc {
    pub fn new(report: &SequenceReport, d: &DynamicsDiagram, ids: &[IndividualId]) -> Self {
        let label = |k: usize| d.states[k].label(ids);
        SequenceDoc {
            changes: report.changes,
            sequences: report
                .paths
                .iter()
                .map(|p| SequenceEntry {
                    sequence: p.states.iter().map(|&k| label(k)).collect(),
                    states: p.states.clone(),
                    cost: p.cost,
                    occurrences: p.occurrences,
                    supp_path: p.support,
                })
                .collect(),
            unreachable: report.unreachable.iter().map(|&(a, b)| (label(a), label(b))).collect(),
        }
    }
}

/// Square matrix with identifiers as the header row and first column.
pub fn write_matrix_csv<W: Write>(ids: &[IndividualId], m: &[Vec<f64>], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec![String::from("id")];
    header.extend(ids.iter().map(|id| id.to_string()));
    wr.write_record(&header)?;
    for (id, row) in ids.iter().zip(m) {
        let mut rec = vec![id.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        wr.write_record(&rec)?;
    }
    wr.flush().map_err(io_err)
}

pub fn read_matrix_csv<R: std::io::Read>(r: R) -> Result<(Vec<IndividualId>, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_reader(r);
    let ids: Vec<IndividualId> = rdr.headers()?.iter().skip(1).map(IndividualId::from).collect();
    let mut m = Vec::with_capacity(ids.len());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.get(0) != ids.get(k).map(|id| id.as_str()) {
            return Err(Error::Malformed(format!("row {k} is not labelled {:?}", ids.get(k))));
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|_| Error::Malformed(format!("non-numeric cell `{v}`"))))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != ids.len() {
            return Err(Error::MatrixNotSquare { rows: ids.len(), cols: row.len() });
        }
        m.push(row);
    }
    if m.len() != ids.len() {
        return Err(Error::MatrixNotSquare { rows: m.len(), cols: ids.len() });
    }
    Ok((ids, m))
}

/// Cluster membership and the partition's modularity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDoc {
    pub clusters: Vec<Vec<IndividualId>>,
    #[serde(rename = "Q")]
    pub q: f64,
}

impl ClusterDoc {
    pub fn new(c: &ClusterSet, q: f64, ids: &[IndividualId]) -> Self {
        ClusterDoc {
            clusters: c.clusters.iter().map(|m| names(ids, m)).collect(),
            q,
        }
    }
}

/// Merge list: one row per agglomeration step.
pub fn write_dendrogram_csv<W: Write>(d: &Dendrogram, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["step", "a", "b", "height", "size"])?;
    for (k, m) in d.merges.iter().enumerate() {
        wr.write_record([k.to_string(), m.a.to_string(), m.b.to_string(), m.height.to_string(), m.size.to_string()])?;
    }
    wr.flush().map_err(io_err)
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    if v.len() % 2 == 1 {
        v[h]
    } else {
        (v[h - 1] + v[h]) / 2.0
    }
}

/// Cluster graph: one node per cluster, edges weighted by the median
/// co-faction support between members of the two clusters.
pub fn cluster_dot(c: &ClusterSet, support: &[Vec<f64>], ids: &[IndividualId]) -> String {
    let mut s = String::from("graph clusters {\n");
    for (k, members) in c.clusters.iter().enumerate() {
        let label: Vec<&str> = members.iter().map(|&m| ids[m].as_str()).collect();
        let _ = writeln!(s, "  c{k} [label=\"{}\"];", label.join(","));
    }
    for a in 0..c.len() {
        for b in a + 1..c.len() {
            let cross = c.clusters[a]
                .iter()
                .flat_map(|&i| c.clusters[b].iter().map(move |&j| support[i][j]))
                .collect();
            let w = median(cross);
            let _ = writeln!(s, "  c{a} -- c{b} [label=\"{w:.3}\", weight={w:.4}];");
        }
    }
    s.push_str("}\n");
    s
}

/// Bipartite lead-follow graph; followers on the left, initiators on the right.
pub fn leadfollow_dot(g: &LeadFollowNetwork) -> String {
    let mut s = String::from("digraph leadfollow {\n  rankdir=LR;\n");
    s.push_str("  subgraph cluster_followers { label=\"followers\";");
    for &f in &g.followers {
        let _ = write!(s, " \"f{}\" [label=\"{}\"];", g.ids[f], g.ids[f]);
    }
    s.push_str(" }\n  subgraph cluster_leaders { label=\"initiators\";");
    for &l in &g.leaders {
        let _ = write!(s, " \"l{}\" [label=\"{}\"];", g.ids[l], g.ids[l]);
    }
    s.push_str(" }\n");
    for e in &g.edges {
        let _ = writeln!(s, "  \"f{}\" -> \"l{}\" [label=\"{:.3}\"];", g.ids[e.follower], g.ids[e.leader], e.weight);
    }
    s.push_str("}\n");
    s
}

/// Undirected co-faction graph with its thresholded edges.
pub fn cofaction_dot(ids: &[IndividualId], adjacency: &[Vec<f64>]) -> String {
    let mut s = String::from("graph cofaction {\n");
    for id in ids {
        let _ = writeln!(s, "  \"{id}\";");
    }
    for (a, row) in adjacency.iter().enumerate() {
        for (b, &w) in row.iter().enumerate().skip(a + 1) {
            if w > 0.0 {
                let _ = writeln!(s, "  \"{}\" -- \"{}\" [weight={w:.4}];", ids[a], ids[b]);
            }
        }
    }
    s.push_str("}\n");
    s
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: impl AsRef<Path>, contents: impl AsRef<[u8]>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_str(&read_file(path)?)?)
}

/// Opens a file for line-oriented reading.
pub fn open(path: impl AsRef<Path>) -> Result<std::io::BufReader<std::fs::File>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(std::io::BufReader::new(f))
}

/// Renders into memory with one of the writers above.
pub fn render<F>(f: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}
