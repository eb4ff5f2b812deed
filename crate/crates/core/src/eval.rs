//! Losses against ground truth and batch experiments over simulated replicas.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::cluster_f1;
use crate::error::{Error, Result};
use crate::faction::LeaderSet;
use crate::pipeline::{run_pipeline, Backend, PipelineConfig};
use crate::sim::{simulate, Dynamics, GroundTruth, IcParams, Kinematics, Model, ScenarioSpec};

/// Loss split into its parts; `total = (l1 + fp + fn) / n_truth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    pub l1_term: f64,
    pub fp_term: f64,
    pub fn_term: f64,
    pub n_truth: usize,
}

pub type DiagramLoss = LossBreakdown;

impl LossBreakdown {
    fn new(l1_term: f64, fp_term: f64, fn_term: f64, n_truth: usize) -> Self {
        let total = if n_truth == 0 {
            0.0
        } else {
            (l1_term + fp_term + fn_term) / n_truth as f64
        };
        LossBreakdown {
            total,
            l1_term,
            fp_term,
            fn_term,
            n_truth,
        }
    }
}

fn check_square(m: &[Vec<f64>], k: usize, what: &str) -> Result<()> {
    if m.len() != k || m.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidParameter(format!("{what} matrix does not match its {k} states")));
    }
    Ok(())
}

/// Compares two transition matrices indexed by leader sets.
///
/// Entries between states present in both are compared directly. Any entry
/// touching a predicted-only state counts fully as false positive mass, any
/// entry touching a missed state as false negative mass. The sum is divided by
/// the number of elements of the true matrix.
pub fn diagram_loss(
    pred_states: &[LeaderSet],
    pred: &[Vec<f64>],
    truth_states: &[LeaderSet],
    truth: &[Vec<f64>],
) -> Result<DiagramLoss> {
    check_square(pred, pred_states.len(), "predicted")?;
    check_square(truth, truth_states.len(), "true")?;
    let to_truth: Vec<Option<usize>> = pred_states
        .iter()
        .map(|s| truth_states.iter().position(|t| t == s))
        .collect();
    let in_pred: Vec<bool> = truth_states.iter().map(|t| pred_states.contains(t)).collect();

    let (mut l1, mut fp) = (0.0, 0.0);
    for (i, row) in pred.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            match (to_truth[i], to_truth[j]) {
                (Some(ti), Some(tj)) => l1 += (a - truth[ti][tj]).abs(),
                _ => fp += a.abs(),
            }
        }
    }
    let mut fn_ = 0.0;
    for (i, row) in truth.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            if !in_pred[i] || !in_pred[j] {
                fn_ += a.abs();
            }
        }
    }
    let k = truth_states.len();
    Ok(LossBreakdown::new(l1, fp, fn_, k * k))
}

/// Mean absolute difference over unordered pairs `i < j`.
pub fn cofaction_loss(pred: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<f64> {
    let n = truth.len();
    check_square(truth, n, "true")?;
    check_square(pred, n, "predicted")?;
    if n < 2 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += (pred[i][j] - truth[i][j]).abs();
        }
    }
    Ok(sum / (n * (n - 1) / 2) as f64)
}

/// Compares lead-follow matrices (`m[follower][leader]`) restricted to the
/// given leader columns. Every individual counts as a potential follower.
///
/// Shared leaders are compared over all followers; columns of predicted-only
/// leaders are false positive mass and columns of missed leaders false
/// negative mass. The denominator is `|truth leaders| * n`.
pub fn leadfollow_loss(
    pred: &[Vec<f64>],
    pred_leaders: &[usize],
    truth: &[Vec<f64>],
    truth_leaders: &[usize],
) -> Result<LossBreakdown> {
    let n = truth.len();
    check_square(truth, n, "true")?;
    check_square(pred, n, "predicted")?;
    if let Some(&bad) = pred_leaders.iter().chain(truth_leaders).find(|&&j| j >= n) {
        return Err(Error::UnknownId(format!("leader index {bad} (n = {n})")));
    }
    let column = |m: &[Vec<f64>], j: usize| m.iter().map(|r| r[j].abs()).sum::<f64>();
    let (mut l1, mut fp, mut fn_) = (0.0, 0.0, 0.0);
    for &j in pred_leaders {
        if truth_leaders.contains(&j) {
            l1 += (0..n).map(|i| (pred[i][j] - truth[i][j]).abs()).sum::<f64>();
        } else {
            fp += column(pred, j);
        }
    }
    for &j in truth_leaders.iter().filter(|j| !pred_leaders.contains(j)) {
        fn_ += column(truth, j);
    }
    Ok(LossBreakdown::new(l1, fp, fn_, truth_leaders.len() * n))
}

/// Thresholds a lead-follow support matrix and keeps the leaders that retain
/// at least one entry.
pub fn thresholded_leadfollow(support: &[Vec<f64>], leaders: &[usize], phi_lf: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let n = support.len();
    let mut m = vec![vec![0.0; n]; n];
    let mut kept = Vec::new();
    for &j in leaders {
        let mut any = false;
        for i in 0..n {
            let w = support[i][j];
            if w > 0.0 && w >= phi_lf {
                m[i][j] = w;
                any = true;
            }
        }
        if any {
            kept.push(j);
        }
    }
    (m, kept)
}

/// Leadership sequence the scenario is expected to produce most often.
pub fn expected_sequence(dynamics: Dynamics) -> Vec<LeaderSet> {
    match dynamics {
        Dynamics::Type1 => vec![
            LeaderSet::new([1, 2, 3]),
            LeaderSet::new([2]),
            LeaderSet::new([3]),
            LeaderSet::new([0]),
        ],
        Dynamics::Type2 => (0..4).map(|k| LeaderSet::new([k])).collect(),
    }
}

/// Metrics of one replica. Significance rates are absent unless requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaMetrics {
    pub model: Model,
    pub dynamics: Dynamics,
    pub backend: Backend,
    pub ic_k: Option<usize>,
    pub ic_rho: Option<f64>,
    pub replica: usize,
    pub seed: u64,
    pub states: usize,
    pub diagram_loss: f64,
    pub best_sequence: String,
    pub best_support: f64,
    pub best_matches: bool,
    pub cofaction_loss: f64,
    pub leadfollow_loss: f64,
    pub clusters: usize,
    pub f1: f64,
    pub modularity: f64,
    pub edge_weight_rejection: Option<f64>,
    pub sequence_support_rejection: Option<f64>,
}

/// Summary statistics of one metric; `lo`/`hi` are mean -/+ two sample
/// standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub median: f64,
    pub mean: f64,
    pub std: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Option<Aggregate> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let k = v.len();
        let median = if k % 2 == 1 { v[k / 2] } else { (v[k / 2 - 1] + v[k / 2]) / 2.0 };
        let mean = values.iter().sum::<f64>() / k as f64;
        let std = if k > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Aggregate {
            count: k,
            median,
            mean,
            std,
            lo: mean - 2.0 * std,
            hi: mean + 2.0 * std,
        })
    }
}

/// One grid cell of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub model: Model,
    pub dynamics: Dynamics,
    pub backend: Backend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ic: Option<IcParams>,
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.model, self.dynamics, self.backend)?;
        if let Some(p) = self.ic {
            write!(f, " k={} rho={}", p.k, p.rho)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub cell: Cell,
    pub replica: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: Cell,
    pub replicas: usize,
    pub excluded: usize,
    pub metrics: BTreeMap<String, Aggregate>,
    /// Fraction of replicas whose best sequence is the expected one.
    pub best_match_rate: f64,
    /// Distribution of recovered cluster counts.
    pub cluster_counts: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub replicas: Vec<ReplicaMetrics>,
    pub failures: Vec<Failure>,
    pub cells: Vec<CellSummary>,
}

/// Scenario shape shared by every cell; defaults match [`ScenarioSpec::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioShape {
    pub n: usize,
    pub length: usize,
    pub events: usize,
    pub event_len: usize,
    pub segment_len: usize,
    pub kinematics: Kinematics,
}

impl Default for ScenarioShape {
    fn default() -> Self {
        let s = ScenarioSpec::new(Model::Hierarchical, Dynamics::Type2, 0);
        ScenarioShape {
            n: s.n,
            length: s.length,
            events: s.events,
            event_len: s.event_len,
            segment_len: s.segment_len,
            kinematics: s.kinematics,
        }
    }
}

fn default_backends() -> Vec<Backend> {
    vec![Backend::Following]
}

fn default_replicas() -> usize {
    20
}

/// Grid of scenarios and the pipeline settings applied to each replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub models: Vec<Model>,
    #[serde(default)]
    pub dynamics: Vec<Dynamics>,
    #[serde(default = "default_backends")]
    pub backends: Vec<Backend>,
    /// IC parameter pairs; each IC cell is repeated for every pair.
    #[serde(default)]
    pub ic: Vec<IcParams>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    /// Replica `r` is simulated with seed `seed + r` in every cell.
    #[serde(default)]
    pub seed: u64,
    /// Also run both significance protocols per replica.
    #[serde(default)]
    pub significance: bool,
    #[serde(default)]
    pub scenario: ScenarioShape,
    pub pipeline: PipelineConfig,
}

impl ExperimentConfig {
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let mut out = Vec::new();
        for &model in &self.models {
            let ics: Vec<Option<IcParams>> = if model == Model::IndependentCascade {
                if self.ic.is_empty() {
                    return Err(Error::InvalidSpec("IC cells need at least one (k, rho) pair".into()));
                }
                self.ic.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            for &dynamics in &self.dynamics {
                for &ic in &ics {
                    for &backend in &self.backends {
                        out.push(Cell { model, dynamics, backend, ic });
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn spec(&self, cell: &Cell, replica: usize) -> ScenarioSpec {
        let s = &self.scenario;
        ScenarioSpec {
            model: cell.model,
            dynamics: cell.dynamics,
            n: s.n,
            length: s.length,
            events: s.events,
            event_len: s.event_len,
            segment_len: s.segment_len,
            ic: cell.ic,
            seed: self.seed.wrapping_add(replica as u64),
            kinematics: s.kinematics,
        }
    }
}

/// Runs one replica end to end and scores it against its ground truth.
pub fn evaluate_replica(
    cell: &Cell,
    spec: &ScenarioSpec,
    pipeline: &PipelineConfig,
    significance: bool,
    replica: usize,
) -> Result<ReplicaMetrics> {
    let (ds, truth) = simulate(spec)?;
    let cfg = PipelineConfig {
        backend: cell.backend,
        seed: pipeline.seed.wrapping_add(spec.seed),
        ..pipeline.clone()
    };
    let out = run_pipeline(&ds, &cfg)?;
    let scores = score(&out, &truth, &cfg)?;
    let (ew, ss) = if significance {
        let [ew, ss] = out.significance(&cfg)?;
        (Some(ew.joint_rate), Some(ss.joint_rate))
    } else {
        (None, None)
    };
    let best = out.sequences.best();
    Ok(ReplicaMetrics {
        model: cell.model,
        dynamics: cell.dynamics,
        backend: cell.backend,
        ic_k: cell.ic.map(|p| p.k),
        ic_rho: cell.ic.map(|p| p.rho),
        replica,
        seed: spec.seed,
        states: out.diagram.diagram.len(),
        diagram_loss: scores.diagram.total,
        best_sequence: best
            .map(|p| {
                let labels: Vec<String> = p.states.iter().map(|&s| out.diagram.diagram.states[s].label(&truth.ids)).collect();
                labels.join(" ")
            })
            .unwrap_or_default(),
        best_support: best.map_or(0.0, |p| p.support),
        best_matches: scores.best_matches,
        cofaction_loss: scores.cofaction,
        leadfollow_loss: scores.leadfollow.total,
        clusters: out.followership.clustering.clusters.len(),
        f1: scores.f1,
        modularity: out.followership.modularity,
        edge_weight_rejection: ew,
        sequence_support_rejection: ss,
    })
}

/// All losses of one pipeline run against its ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub diagram: DiagramLoss,
    pub best_matches: bool,
    pub cofaction: f64,
    pub leadfollow: LossBreakdown,
    pub f1: f64,
}

pub fn score(out: &crate::pipeline::PipelineOutput, truth: &GroundTruth, cfg: &PipelineConfig) -> Result<Scores> {
    let d = &out.diagram.diagram;
    let diagram = diagram_loss(&d.states, &d.a_star, &truth.states, &truth.diagram)?;
    let expected = expected_sequence(truth.dynamics);
    let best_matches = out
        .sequences
        .best()
        .is_some_and(|p| p.states.iter().map(|&s| &d.states[s]).eq(expected.iter()));
    let cofaction = cofaction_loss(&out.followership.cofaction.support, &truth.cofaction)?;
    let lf = &out.followership.leadfollow;
    let (pred_lf, pred_leaders) = thresholded_leadfollow(&lf.support, &lf.leaders, cfg.phi_lf);
    let leadfollow = leadfollow_loss(&pred_lf, &pred_leaders, &truth.leadfollow, &truth.leaders)?;
    let f1 = cluster_f1(&out.followership.clustering.clusters, &truth.clusters);
    Ok(Scores {
        diagram,
        best_matches,
        cofaction,
        leadfollow,
        f1,
    })
}

/// Every replica of every cell, in parallel. Failing replicas are excluded
/// from the aggregates and listed in `failures`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<BatchReport> {
    cfg.pipeline.validate()?;
    let cells = cfg.cells()?;
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.replicas).map(move |r| (c, r)))
        .collect();
    let results: Vec<(usize, usize, Result<ReplicaMetrics>)> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let spec = cfg.spec(&cells[c], r);
            (c, r, evaluate_replica(&cells[c], &spec, &cfg.pipeline, cfg.significance, r))
        })
        .collect();

    let mut replicas = Vec::new();
    let mut failures = Vec::new();
    for (c, r, res) in results {
        match res {
            Ok(m) => replicas.push(m),
            Err(e) => failures.push(Failure {
                cell: cells[c],
                replica: r,
                seed: cfg.spec(&cells[c], r).seed,
                error: e.to_string(),
            }),
        }
    }
    let summaries = summarize(&cells, &replicas, &failures);
    Ok(BatchReport {
        replicas,
        failures,
        cells: summaries,
    })
}

fn cell_of(m: &ReplicaMetrics) -> (Model, Dynamics, Backend, Option<usize>, Option<u64>) {
    (m.model, m.dynamics, m.backend, m.ic_k, m.ic_rho.map(f64::to_bits))
}

/// Per-cell aggregates; depends only on the per-replica rows.
pub fn summarize(cells: &[Cell], replicas: &[ReplicaMetrics], failures: &[Failure]) -> Vec<CellSummary> {
    cells
        .iter()
        .map(|cell| {
            let key = (cell.model, cell.dynamics, cell.backend, cell.ic.map(|p| p.k), cell.ic.map(|p| p.rho.to_bits()));
            let rows: Vec<&ReplicaMetrics> = replicas.iter().filter(|m| cell_of(m) == key).collect();
            let mut metrics = BTreeMap::new();
            let mut put = |name: &str, values: Vec<f64>| {
                if let Some(a) = Aggregate::of(&values) {
                    metrics.insert(name.to_string(), a);
                }
            };
            put("diagram_loss", rows.iter().map(|m| m.diagram_loss).collect());
            put("best_support", rows.iter().map(|m| m.best_support).collect());
            put("cofaction_loss", rows.iter().map(|m| m.cofaction_loss).collect());
            put("leadfollow_loss", rows.iter().map(|m| m.leadfollow_loss).collect());
            put("f1", rows.iter().map(|m| m.f1).collect());
            put("modularity", rows.iter().map(|m| m.modularity).collect());
            put("edge_weight_rejection", rows.iter().filter_map(|m| m.edge_weight_rejection).collect());
            put(
                "sequence_support_rejection",
                rows.iter().filter_map(|m| m.sequence_support_rejection).collect(),
            );
            let mut cluster_counts = BTreeMap::new();
            for m in &rows {
                *cluster_counts.entry(m.clusters).or_insert(0) += 1;
            }
            let best_match_rate = if rows.is_empty() {
                0.0
            } else {
                rows.iter().filter(|m| m.best_matches).count() as f64 / rows.len() as f64
            };
            CellSummary {
                cell: *cell,
                replicas: rows.len(),
                excluded: failures.iter().filter(|f| f.cell == *cell).count(),
                metrics,
                best_match_rate,
                cluster_counts,
            }
        })
        .collect()
}

pub fn write_replicas_csv<W: Write>(rows: &[ReplicaMetrics], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_replicas_csv<R: Read>(reader: R) -> Result<Vec<ReplicaMetrics>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

impl BatchReport {
    /// Plain-text tables: medians for the diagram loss, mean +/- 2 sd elsewhere.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let fmt_mean = |a: Option<&Aggregate>| a.map_or("-".to_string(), |a| format!("{:.3}±{:.3}", a.mean, 2.0 * a.std));
        s.push_str(&format!(
            "{:<34} {:>4} {:>4} {:>9} {:>9} {:>13} {:>13} {:>13} {:>13}\n",
            "cell", "ok", "excl", "diag(med)", "seq-match", "cofaction", "leadfollow", "F1", "Q"
        ));
        for c in &self.cells {
            let m = &c.metrics;
            s.push_str(&format!(
                "{:<34} {:>4} {:>4} {:>9} {:>9.2} {:>13} {:>13} {:>13} {:>13}\n",
                c.cell.to_string(),
                c.replicas,
                c.excluded,
                m.get("diagram_loss").map_or("-".into(), |a| format!("{:.3}", a.median)),
                c.best_match_rate,
                fmt_mean(m.get("cofaction_loss")),
                fmt_mean(m.get("leadfollow_loss")),
                fmt_mean(m.get("f1")),
                fmt_mean(m.get("modularity")),
            ));
        }
        if self.cells.iter().any(|c| c.metrics.contains_key("edge_weight_rejection")) {
            s.push_str(&format!("\n{:<34} {:>12} {:>16}\n", "cell", "edge-weight", "sequence-support"));
            for c in &self.cells {
                let rate = |k: &str| c.metrics.get(k).map_or("-".into(), |a| format!("{:.3}", a.mean));
                s.push_str(&format!(
                    "{:<34} {:>12} {:>16}\n",
                    c.cell.to_string(),
                    rate("edge_weight_rejection"),
                    rate("sequence_support_rejection")
                ));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(k: usize) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; k]; k];
        for (i, row) in a.iter_mut().enumerate() {
            row[(i + 1) % k] = 1.0;
        }
        a
    }

    fn singles(k: usize) -> Vec<LeaderSet> {
        (0..k).map(|i| LeaderSet::new([i])).collect()
    }

    #[test]
    fn diagram_loss_examples() {
        let s = singles(4);
        let a = cycle(4);
        assert_eq!(diagram_loss(&s, &a, &s, &a).unwrap().total, 0.0);

        let mut missing = a.clone();
        missing[3][0] = 0.0;
        let l = diagram_loss(&s, &missing, &s, &a).unwrap();
        assert_eq!(l.n_truth, 16);
        assert_eq!(l.total, 1.0 / 16.0);

        // Extra predicted state {5} with mass on two entries.
        let mut ps = s.clone();
        ps.push(LeaderSet::new([5]));
        let mut p = vec![vec![0.0; 5]; 5];
        for (i, row) in a.iter().enumerate() {
            p[i][..4].copy_from_slice(row);
        }
        p[4][0] = 1.0;
        p[2][4] = 0.25;
        let l = diagram_loss(&ps, &p, &s, &a).unwrap();
        assert_eq!((l.l1_term, l.fp_term, l.fn_term), (0.0, 1.25, 0.0));

        // Reversed roles: now the state is missed.
        let l = diagram_loss(&s, &a, &ps, &p).unwrap();
        assert_eq!((l.fp_term, l.fn_term, l.n_truth), (0.0, 1.25, 25));
    }

    #[test]
    fn cofaction_loss_examples() {
        let t = vec![vec![0.0, 0.5, 0.2], vec![0.5, 0.0, 0.9], vec![0.2, 0.9, 0.0]];
        assert_eq!(cofaction_loss(&t, &t).unwrap(), 0.0);
        let shifted: Vec<Vec<f64>> = t
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().enumerate().map(|(j, v)| if i == j { 0.0 } else { v + 0.1 }).collect())
            .collect();
        assert!((cofaction_loss(&shifted, &t).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(cofaction_loss(&shifted, &t).unwrap(), cofaction_loss(&t, &shifted).unwrap());
    }

    #[test]
    fn leadfollow_loss_examples() {
        let n = 4;
        let mut t = vec![vec![0.0; n]; n];
        for row in &mut t {
            row[0] = 0.5;
            row[1] = 0.25;
        }
        let l = leadfollow_loss(&t, &[0, 1], &t, &[0, 1]).unwrap();
        assert_eq!((l.total, l.n_truth), (0.0, 8));

        // A spurious initiator 3 with total mass 0.6.
        let mut p = t.clone();
        p[0][3] = 0.4;
        p[2][3] = 0.2;
        let l = leadfollow_loss(&p, &[0, 1, 3], &t, &[0, 1]).unwrap();
        assert!((l.total - 0.6 / 8.0).abs() < 1e-12);
        assert!((l.fp_term - 0.6).abs() < 1e-12);

        // Asymmetric in its arguments.
        let back = leadfollow_loss(&t, &[0, 1], &p, &[0, 1, 3]).unwrap();
        assert_ne!(back.total, l.total);
    }

    #[test]
    fn thresholding_drops_empty_leaders() {
        let s = vec![vec![0.3, 0.05], vec![0.2, 0.05]];
        let (m, kept) = thresholded_leadfollow(&s, &[0, 1], 0.1);
        assert_eq!(kept, vec![0]);
        assert_eq!(m, vec![vec![0.3, 0.0], vec![0.2, 0.0]]);
    }

    #[test]
    fn aggregate_values() {
        let a = Aggregate::of(&[1.0, 3.0, 2.0, 10.0]).unwrap();
        assert_eq!(a.median, 2.5);
        assert_eq!(a.mean, 4.0);
        assert!((a.std - (50.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(Aggregate::of(&[]).is_none());
        assert_eq!(Aggregate::of(&[7.0]).unwrap().std, 0.0);
    }

    #[test]
    fn empty_grid_is_empty_report() {
        let cfg = ExperimentConfig {
            models: vec![],
            dynamics: vec![],
            backends: default_backends(),
            ic: vec![],
            replicas: 3,
            seed: 0,
            significance: false,
            scenario: ScenarioShape::default(),
            pipeline: PipelineConfig::new(40),
        };
        let r = run_experiment(&cfg).unwrap();
        assert!(r.replicas.is_empty() && r.cells.is_empty() && r.failures.is_empty());
    }
}
