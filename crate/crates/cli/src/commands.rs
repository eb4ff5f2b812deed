use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use leadfollow::cluster::{cluster_cofaction, modularity, Clustering};
use leadfollow::data::{ingest_csv, CsvSchema, GapPolicy, IndividualId};
use leadfollow::dynamics::{encode_states, LeaderSetSupport};
use leadfollow::eval::{run_experiment, write_replicas_csv, ExperimentConfig};
use leadfollow::export::{self, ClusterDoc, DiagramDoc, SequenceDoc};
use leadfollow::faction::{leader_series, FactionSeries, LeaderSeries};
use leadfollow::pipeline::{diagram_stage, followership_stage, infer_network as build_network, run_pipeline, FollowershipStage};
use leadfollow::sequence::{mine_sequences, OccurrenceCount, SequenceReport};
use leadfollow::significance::{calibration_protocol, significance_protocol, NullKind, RejectionReport, SignificanceInput};
use leadfollow::sim::{simulate as run_simulation, Dynamics, IcParams, Model, ScenarioSpec};
use leadfollow::{DynamicFollowingNetwork, DynamicsDiagram, ErrorClass, PipelineConfig};
use serde::Serialize;

use crate::config::{fresh_seed, load_file, ParamArgs};
use crate::{CmdResult, Failure, Log};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Csv,
}

fn unsupported(cmd: &str, f: Format) -> Failure {
    Failure::new(ErrorClass::Config, format!("{cmd} cannot emit {f:?} output"))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>, log: Log) -> CmdResult {
    export::write_file(path, bytes)?;
    log.wrote(&path.to_path_buf());
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    Ok(export::to_json_string(value)?)
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Trajectory CSV with one row per individual and time step.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "id")]
    pub id_col: String,
    #[arg(long, default_value = "t")]
    pub t_col: String,
    #[arg(long, default_value = "x")]
    pub x_col: String,
    #[arg(long, default_value = "y")]
    pub y_col: String,
    /// Fill interior gaps by linear interpolation instead of rejecting them.
    #[arg(long)]
    pub interpolate: bool,
}

impl InputArgs {
    fn load(&self, fallback: Option<PathBuf>) -> Result<leadfollow::Dataset, Failure> {
        let path = self
            .input
            .clone()
            .or(fallback)
            .ok_or_else(|| Failure::new(ErrorClass::Config, "no input trajectories (--input or `input` in the config)"))?;
        let schema = CsvSchema {
            id: self.id_col.clone(),
            t: self.t_col.clone(),
            x: self.x_col.clone(),
            y: self.y_col.clone(),
        };
        let gaps = if self.interpolate { GapPolicy::Interpolate } else { GapPolicy::Reject };
        Ok(ingest_csv(&path, &schema, gaps)?)
    }
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Leadership model: DM, HM or IC.
    #[arg(long)]
    pub model: Model,
    /// Coordination type: type1 (split and merge) or type2 (linear hand-over).
    #[arg(long, default_value = "type2")]
    pub dynamics: Dynamics,
    /// Neighbours each newly active individual tries to activate (IC only).
    #[arg(long)]
    pub k: Option<usize>,
    /// Initial activation probability (IC only).
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long)]
    pub events: Option<usize>,
    #[arg(long)]
    pub event_len: Option<usize>,
    #[arg(long)]
    pub segment_len: Option<usize>,
    /// Number of datasets; replica `r` uses seed `seed + r`.
    #[arg(long, default_value_t = 1)]
    pub replicas: usize,
    #[arg(long, env = "LEADFOLLOW_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct ManifestEntry {
    replica: usize,
    seed: u64,
    trajectories: String,
    truth: String,
}

#[derive(Serialize)]
struct Manifest {
    spec: ScenarioSpec,
    replicas: Vec<ManifestEntry>,
}

pub fn simulate(a: SimulateArgs, log: Log) -> CmdResult {
    let seed = a.seed.unwrap_or_else(|| {
        let s = fresh_seed();
        log.info(format!("no seed given, using seed {s}"));
        s
    });
    let mut spec = ScenarioSpec::new(a.model, a.dynamics, seed);
    if a.model == Model::IndependentCascade {
        let d = spec.ic.unwrap_or(IcParams { k: 5, rho: 0.5 });
        spec.ic = Some(IcParams {
            k: a.k.unwrap_or(d.k),
            rho: a.rho.unwrap_or(d.rho),
        });
    } else if a.k.is_some() || a.rho.is_some() {
        return Err(Failure::new(ErrorClass::Config, "--k and --rho only apply to the IC model"));
    }
    spec.n = a.n.unwrap_or(spec.n);
    spec.length = a.length.unwrap_or(spec.length);
    spec.events = a.events.unwrap_or(spec.events);
    spec.event_len = a.event_len.unwrap_or(spec.event_len);
    spec.segment_len = a.segment_len.unwrap_or(spec.segment_len);
    spec.validate()?;
    if a.replicas == 0 {
        return Err(Failure::new(ErrorClass::Config, "--replicas must be positive"));
    }

    let mut entries = Vec::new();
    for r in 0..a.replicas {
        let rspec = ScenarioSpec {
            seed: seed.wrapping_add(r as u64),
            ..spec.clone()
        };
        let sub = if a.replicas == 1 { PathBuf::new() } else { PathBuf::from(format!("replica_{r:03}")) };
        let (ds, truth) = run_simulation(&rspec)?;
        let traj = sub.join("trajectories.csv");
        let tr = sub.join("truth.json");
        write(&a.out.join(&traj), export::render(|b| ds.write_csv(b))?, log)?;
        write(&a.out.join(&tr), json(&truth)?, log)?;
        entries.push(ManifestEntry {
            replica: r,
            seed: rspec.seed,
            trajectories: traj.display().to_string(),
            truth: tr.display().to_string(),
        });
    }
    let manifest = Manifest { spec, replicas: entries };
    write(&a.out.join("manifest.json"), json(&manifest)?, log)
}

// ---------------------------------------------------------------- stages

#[derive(Debug, Args)]
pub struct InferArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Network series (JSON lines), or one window's DOT graph with `--format dot`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Window exported with `--format dot`.
    #[arg(long)]
    pub window: Option<usize>,
}

pub fn infer_network(a: InferArgs, log: Log) -> CmdResult {
    let r = a.params.resolve(true)?;
    let ds = a.input.load(r.input.clone())?;
    log.info(format!("{} individuals, {} steps", ds.n(), ds.len()));
    let net = build_network(&ds, &r.pipeline)?;
    log.info(format!("{} windows", net.len()));
    match a.format {
        Format::Json => emit_network(&net, &a.out, log),
        Format::Dot => {
            let w = a
                .window
                .ok_or_else(|| Failure::new(ErrorClass::Config, "--format dot needs --window"))?;
            write(&a.out, export::network_dot(&net, w)?, log)
        }
        f => Err(unsupported("infer-network", f)),
    }
}

fn emit_network(net: &DynamicFollowingNetwork, out: &Path, log: Log) -> CmdResult {
    write(out, export::render(|b| export::write_network_jsonl(net, b))?, log)
}

#[derive(Debug, Args)]
pub struct LeadersArgs {
    /// Network series written by `infer-network`.
    #[arg(long)]
    pub network: PathBuf,
    /// Leader series (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Faction series (JSON lines).
    #[arg(long)]
    pub factions: Option<PathBuf>,
}

pub fn leaders(a: LeadersArgs, log: Log) -> CmdResult {
    let net = export::read_network_jsonl(export::open(&a.network)?)?;
    let (series, factions) = leader_series(&net);
    emit_leaders(&series, &net.ids, &a.out, log)?;
    if let Some(p) = &a.factions {
        emit_factions(&factions, &net.ids, p, log)?;
    }
    Ok(())
}

fn emit_leaders(series: &LeaderSeries, ids: &[IndividualId], out: &Path, log: Log) -> CmdResult {
    write(out, export::render(|b| export::write_leaders_jsonl(series, ids, b))?, log)
}

fn emit_factions(f: &FactionSeries, ids: &[IndividualId], out: &Path, log: Log) -> CmdResult {
    write(out, export::render(|b| export::write_factions_jsonl(f, ids, b))?, log)
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    /// Leader series written by `leaders`.
    #[arg(long)]
    pub leaders: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

pub fn diagram(a: DiagramArgs, log: Log) -> CmdResult {
    let r = a.params.resolve(false)?;
    let (ids, series) = export::read_leaders_jsonl(export::open(&a.leaders)?)?;
    let stage = diagram_stage(&series, &r.pipeline)?;
    log.info(format!("{} frequent leader sets", stage.frequent.len()));
    emit_diagram(&stage.diagram, &ids, &a.out, a.format, log)
}

fn emit_diagram(d: &DynamicsDiagram, ids: &[IndividualId], out: &Path, format: Format, log: Log) -> CmdResult {
    match format {
        Format::Json => write(out, json(&DiagramDoc::new(d, ids))?, log),
        Format::Dot => write(out, export::diagram_dot(d, ids), log),
        f => Err(unsupported("diagram", f)),
    }
}

fn load_diagram(path: &Path) -> Result<(Vec<IndividualId>, DynamicsDiagram), Failure> {
    let doc: DiagramDoc = export::read_json(path)?;
    let d = doc.to_diagram()?;
    Ok((doc.ids, d))
}

/// State sequence of `series` under the states of a fitted diagram.
fn encode_with(series: &LeaderSeries, d: &DynamicsDiagram) -> Result<Vec<usize>, Failure> {
    let frequent: Vec<LeaderSetSupport> = d
        .states
        .iter()
        .zip(&d.supports)
        .map(|(set, &supp)| LeaderSetSupport { set: set.clone(), supp })
        .collect();
    Ok(encode_states(series, &frequent)?)
}

fn same_ids(a: &[IndividualId], b: &[IndividualId]) -> CmdResult {
    if a == b {
        Ok(())
    } else {
        Err(Failure::new(ErrorClass::Input, "leader series and diagram list different individuals"))
    }
}

#[derive(Debug, Args)]
pub struct SequencesArgs {
    #[arg(long)]
    pub leaders: PathBuf,
    /// Diagram JSON written by `diagram`.
    #[arg(long)]
    pub diagram: PathBuf,
    #[arg(long, value_enum, default_value = "min-step")]
    pub occurrence: Occurrence,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Occurrence {
    MinStep,
    Contiguous,
}

impl From<Occurrence> for OccurrenceCount {
    fn from(o: Occurrence) -> Self {
        match o {
            Occurrence::MinStep => OccurrenceCount::MinStep,
            Occurrence::Contiguous => OccurrenceCount::Contiguous,
        }
    }
}

pub fn sequences(a: SequencesArgs, log: Log) -> CmdResult {
    let (ids, series) = export::read_leaders_jsonl(export::open(&a.leaders)?)?;
    let (dids, d) = load_diagram(&a.diagram)?;
    same_ids(&ids, &dids)?;
    let seq = encode_with(&series, &d)?;
    let report = mine_sequences(&d, &seq, a.occurrence.into());
    emit_sequences(&report, &d, &ids, &a.out, log)
}

fn emit_sequences(report: &SequenceReport, d: &DynamicsDiagram, ids: &[IndividualId], out: &Path, log: Log) -> CmdResult {
    let doc = SequenceDoc::new(report, d, ids);
    if let Some(best) = doc.sequences.first() {
        log.info(format!("best sequence {} (supp_path {:.3})", best.sequence.join(" "), best.supp_path));
    }
    write(out, json(&doc)?, log)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestKind {
    EdgeWeight,
    SequenceSupport,
    Both,
}

impl TestKind {
    fn kinds(self) -> Vec<NullKind> {
        match self {
            TestKind::EdgeWeight => vec![NullKind::EdgeWeight],
            TestKind::SequenceSupport => vec![NullKind::SequenceSupport],
            TestKind::Both => vec![NullKind::EdgeWeight, NullKind::SequenceSupport],
        }
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long)]
    pub leaders: PathBuf,
    #[arg(long)]
    pub diagram: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub kind: TestKind,
    /// Compare null draws with each other instead of with the observation.
    #[arg(long)]
    pub calibrate: bool,
    #[arg(long, value_enum, default_value = "min-step")]
    pub occurrence: Occurrence,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Report JSON; an array when both kinds are run.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn test(a: TestArgs, log: Log) -> CmdResult {
    let mut r = a.params.resolve(false)?;
    r.ensure_seed();
    let (ids, series) = export::read_leaders_jsonl(export::open(&a.leaders)?)?;
    let (dids, d) = load_diagram(&a.diagram)?;
    same_ids(&ids, &dids)?;
    let seq = encode_with(&series, &d)?;
    let cfg = PipelineConfig {
        occurrence: a.occurrence.into(),
        ..r.pipeline
    };
    let input = SignificanceInput {
        series: &series,
        diagram: &d,
        seq: &seq,
        phi: cfg.phi,
        fit: cfg.fit,
        occurrence: cfg.occurrence,
    };
    let proto = cfg.protocol();
    let reports = a
        .kind
        .kinds()
        .into_iter()
        .map(|k| {
            if a.calibrate {
                calibration_protocol(k, &input, &proto)
            } else {
                significance_protocol(k, &input, &proto)
            }
        })
        .collect::<leadfollow::Result<Vec<_>>>()?;
    emit_tests(&reports, &a.out, log)
}

fn emit_tests(reports: &[RejectionReport], out: &Path, log: Log) -> CmdResult {
    log.info(format!("{:<18} {:>5} {:>7} {:>7} {:>7} {:>7}", "null model", "R", "KS", "RS", "KW", "joint"));
    for rep in reports {
        let p = rep.per_test_rates;
        log.info(format!(
            "{:<18} {:>5} {:>7.3} {:>7.3} {:>7.3} {:>7.3}",
            rep.kind.to_string(),
            rep.repetitions,
            p.ks,
            p.ranksum,
            p.kruskal_wallis,
            rep.joint_rate
        ));
    }
    let body = match reports {
        [one] => json(one)?,
        many => json(&many)?,
    };
    write(out, body, log)
}

fn wants(formats: &[Format], f: Format) -> bool {
    formats.is_empty() || formats.contains(&f)
}

#[derive(Debug, Args)]
pub struct FollowershipArgs {
    /// Faction series written by `leaders --factions`.
    #[arg(long)]
    pub factions: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Formats to emit (repeatable); all of them by default.
    #[arg(long, value_enum)]
    pub format: Vec<Format>,
}

pub fn followership(a: FollowershipArgs, log: Log) -> CmdResult {
    let r = a.params.resolve(false)?;
    let (ids, factions) = export::read_factions_jsonl(export::open(&a.factions)?)?;
    let stage = followership_stage(&factions, &ids, &r.pipeline)?;
    emit_followership(&stage, &a.out_dir, &a.format, log)
}

fn emit_followership(s: &FollowershipStage, dir: &Path, formats: &[Format], log: Log) -> CmdResult {
    let co = &s.cofaction;
    let lf = &s.leadfollow;
    if wants(formats, Format::Csv) {
        write(&dir.join("cofaction.csv"), export::render(|b| export::write_matrix_csv(&co.ids, &co.support, b))?, log)?;
        write(&dir.join("leadfollow.csv"), export::render(|b| export::write_matrix_csv(&lf.ids, &lf.support, b))?, log)?;
    }
    if wants(formats, Format::Json) {
        write(&dir.join("cofaction.json"), json(co)?, log)?;
        write(&dir.join("leadfollow.json"), json(lf)?, log)?;
    }
    if wants(formats, Format::Dot) {
        write(&dir.join("cofaction.dot"), export::cofaction_dot(&co.ids, &co.adjacency), log)?;
        write(&dir.join("leadfollow.dot"), export::leadfollow_dot(lf), log)?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Co-faction support matrix written by `followership`.
    #[arg(long)]
    pub cofaction: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Formats to emit (repeatable); all of them by default.
    #[arg(long, value_enum)]
    pub format: Vec<Format>,
}

pub fn cluster(a: ClusterArgs, log: Log) -> CmdResult {
    let r = a.params.resolve(false)?;
    let file = std::fs::File::open(&a.cofaction).map_err(|e| leadfollow::Error::Io {
        path: a.cofaction.clone(),
        source: e,
    })?;
    let (ids, support) = export::read_matrix_csv(file)?;
    let phi_co = r.pipeline.phi_co;
    let adjacency: Vec<Vec<f64>> = support
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &w)| if i != j && w >= phi_co { w } else { 0.0 })
                .collect()
        })
        .collect();
    let clustering = cluster_cofaction(&support, r.pipeline.min_spread)?;
    let q = modularity(&adjacency, &clustering.clusters)?;
    emit_clusters(&clustering, q, &support, &ids, &a.out_dir, &a.format, log)
}

fn emit_clusters(
    c: &Clustering,
    q: f64,
    support: &[Vec<f64>],
    ids: &[IndividualId],
    dir: &Path,
    formats: &[Format],
    log: Log,
) -> CmdResult {
    log.info(format!("{} clusters, Q = {q:.4}", c.clusters.len()));
    if wants(formats, Format::Json) {
        write(&dir.join("clusters.json"), json(&ClusterDoc::new(&c.clusters, q, ids))?, log)?;
    }
    if wants(formats, Format::Csv) {
        write(&dir.join("dendrogram.csv"), export::render(|b| export::write_dendrogram_csv(&c.dendrogram, b))?, log)?;
    }
    if wants(formats, Format::Dot) {
        write(&dir.join("clusters.dot"), export::cluster_dot(&c.clusters, support, ids), log)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- batch

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Experiment grid (TOML or JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the replica count of the config.
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long, env = "LEADFOLLOW_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct Summary<'a> {
    cells: &'a [leadfollow::eval::CellSummary],
    failures: &'a [leadfollow::eval::Failure],
}

pub fn evaluate(a: EvaluateArgs, log: Log) -> CmdResult {
    let mut cfg: ExperimentConfig = load_file(&a.config)?;
    if let Some(r) = a.replicas {
        cfg.replicas = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let cells = cfg.cells()?;
    log.info(format!("{} cells x {} replicas", cells.len(), cfg.replicas));
    let report = run_experiment(&cfg)?;
    for f in &report.failures {
        log.info(format!("replica {} of {} (seed {}) excluded: {}", f.replica, f.cell, f.seed, f.error));
    }
    write(
        &a.out_dir.join("replicas.csv"),
        export::render(|b| write_replicas_csv(&report.replicas, b))?,
        log,
    )?;
    let summary = Summary {
        cells: &report.cells,
        failures: &report.failures,
    };
    write(&a.out_dir.join("summary.json"), json(&summary)?, log)?;
    let tables = report.render();
    log.info(&tables);
    write(&a.out_dir.join("tables.txt"), tables, log)
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Output directory; may also come from `out_dir` in the config.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Skip the null-model tests.
    #[arg(long)]
    pub no_tests: bool,
}

/// Runs every stage and writes the same files the individual commands would.
pub fn pipeline(a: PipelineArgs, log: Log) -> CmdResult {
    let mut r = a.params.resolve(true)?;
    let dir = a
        .out_dir
        .clone()
        .or(r.out_dir.clone())
        .ok_or_else(|| Failure::new(ErrorClass::Config, "no output directory (--out-dir or `out_dir` in the config)"))?;
    if !a.no_tests {
        r.ensure_seed();
    }
    let ds = a.input.load(r.input.clone())?;
    log.info(format!("{} individuals, {} steps", ds.n(), ds.len()));
    let cfg = &r.pipeline;
    let out = run_pipeline(&ds, cfg)?;
    let ids = &out.network.ids;

    emit_network(&out.network, &dir.join("network.jsonl"), log)?;
    emit_leaders(&out.leaders, ids, &dir.join("leaders.jsonl"), log)?;
    emit_factions(&out.factions, ids, &dir.join("factions.jsonl"), log)?;
    let d = &out.diagram.diagram;
    emit_diagram(d, ids, &dir.join("diagram.json"), Format::Json, log)?;
    emit_diagram(d, ids, &dir.join("diagram.dot"), Format::Dot, log)?;
    emit_sequences(&out.sequences, d, ids, &dir.join("sequences.json"), log)?;
    if !a.no_tests {
        let reports = out.significance(cfg)?;
        emit_tests(&reports, &dir.join("tests.json"), log)?;
    }
    let f = &out.followership;
    emit_followership(f, &dir, &[], log)?;
    emit_clusters(&f.clustering, f.modularity, &f.cofaction.support, ids, &dir, &[], log)
}
