//! The full inference chain from trajectories to followership clusters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_cofaction, modularity, Clustering};
use crate::data::{Dataset, WindowSpec};
use crate::dynamics::{encode_states, fit_diagram, mine_frequent_sets, DynamicsDiagram, FitOptions, LeaderSetSupport};
use crate::error::{Error, Result};
use crate::faction::{leader_series, FactionSeries, LeaderSeries};
use crate::followership::{build_cofaction_network, build_leadfollow_network, CofactionNetwork, LeadFollowNetwork};
use crate::network::{build_direction_network, build_dynamic_network, DirectionParams, DynamicFollowingNetwork, FollowingParams};
use crate::sequence::{mine_sequences, OccurrenceCount, SequenceReport};
use crate::significance::{calibration_protocol, significance_protocol, NullKind, ProtocolConfig, RejectionReport, SignificanceInput};

/// How per-window following networks are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// DTW lag between window segments.
    #[default]
    Following,
    /// Heading agreement plus relative position; a baseline.
    Direction,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Following => "following",
            Backend::Direction => "direction",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "following" => Ok(Backend::Following),
            "direction" => Ok(Backend::Direction),
            _ => Err(Error::InvalidParameter(format!("unknown backend `{s}`"))),
        }
    }
}

fn default_sigma() -> f64 {
    0.5
}
fn default_phi() -> f64 {
    0.01
}
fn default_phi_co() -> f64 {
    0.8
}
fn default_phi_lf() -> f64 {
    0.1
}
fn default_alpha() -> f64 {
    crate::stats::DEFAULT_ALPHA
}
fn default_repetitions() -> usize {
    100
}
/// Dendrograms whose merge heights spread less than this are read as one
/// cluster. Sized for supports in [0, 1] over a few dozen individuals.
pub const DEFAULT_MIN_SPREAD: f64 = 0.5;

fn default_min_spread() -> f64 {
    DEFAULT_MIN_SPREAD
}

/// Every tunable of the chain. Only `omega` has no default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub omega: usize,
    /// Window slide; a tenth of `omega` when absent.
    #[serde(default)]
    pub delta: Option<usize>,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_phi")]
    pub phi: f64,
    #[serde(default = "default_phi_co")]
    pub phi_co: f64,
    #[serde(default = "default_phi_lf")]
    pub phi_lf: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub occurrence: OccurrenceCount,
    /// Merge heights spread by no more than this form a single cluster.
    #[serde(default = "default_min_spread")]
    pub min_spread: f64,
    #[serde(default)]
    pub band: Option<usize>,
    #[serde(default)]
    pub fit: FitOptions,
    #[serde(default)]
    pub direction: DirectionParams,
}

impl PipelineConfig {
    pub fn new(omega: usize) -> Self {
        PipelineConfig {
            omega,
            delta: None,
            sigma: default_sigma(),
            phi: default_phi(),
            phi_co: default_phi_co(),
            phi_lf: default_phi_lf(),
            alpha: default_alpha(),
            backend: Backend::default(),
            seed: 0,
            repetitions: default_repetitions(),
            occurrence: OccurrenceCount::default(),
            min_spread: default_min_spread(),
            band: None,
            fit: FitOptions::default(),
            direction: DirectionParams::default(),
        }
    }

    pub fn window(&self) -> WindowSpec {
        match self.delta {
            Some(delta) => WindowSpec { omega: self.omega, delta },
            None => WindowSpec::with_default_delta(self.omega),
        }
    }

    pub fn following(&self) -> FollowingParams {
        FollowingParams {
            sigma: self.sigma,
            band: self.band,
            ..FollowingParams::default()
        }
    }

    pub fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig {
            repetitions: self.repetitions,
            alpha: self.alpha,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name}={v} must lie in [0, 1]")))
            }
        };
        if self.omega == 0 {
            return Err(Error::InvalidWindow("omega must be positive".into()));
        }
        self.following().validate()?;
        unit("phi", self.phi)?;
        unit("phi_co", self.phi_co)?;
        unit("phi_lf", self.phi_lf)?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha={} must lie in (0, 1)", self.alpha)));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("repetitions must be positive".into()));
        }
        if self.min_spread.is_nan() || self.min_spread < 0.0 {
            return Err(Error::InvalidParameter("min_spread must be non-negative".into()));
        }
        Ok(())
    }
}

pub fn infer_network(ds: &Dataset, cfg: &PipelineConfig) -> Result<DynamicFollowingNetwork> {
    cfg.validate()?;
    match cfg.backend {
        Backend::Following => build_dynamic_network(ds, cfg.window(), &cfg.following()),
        Backend::Direction => build_direction_network(ds, cfg.window(), &cfg.direction),
    }
}

/// Diagram stage: frequent sets, encoded sequence and the fitted diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramStage {
    pub frequent: Vec<LeaderSetSupport>,
    pub seq: Vec<usize>,
    pub diagram: DynamicsDiagram,
}

pub fn diagram_stage(series: &LeaderSeries, cfg: &PipelineConfig) -> Result<DiagramStage> {
    let frequent = mine_frequent_sets(series, cfg.phi);
    let seq = encode_states(series, &frequent)?;
    let diagram = fit_diagram(&seq, &frequent, cfg.fit)?;
    Ok(DiagramStage { frequent, seq, diagram })
}

/// Followership stage: both networks, clusters and their modularity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowershipStage {
    pub cofaction: CofactionNetwork,
    pub leadfollow: LeadFollowNetwork,
    pub clustering: Clustering,
    pub modularity: f64,
}

pub fn followership_stage(
    factions: &FactionSeries,
    ids: &[crate::data::IndividualId],
    cfg: &PipelineConfig,
) -> Result<FollowershipStage> {
    let cofaction = build_cofaction_network(factions, ids, cfg.phi_co)?;
    let leadfollow = build_leadfollow_network(factions, ids, cfg.phi_lf)?;
    let clustering = cluster_cofaction(&cofaction.support, cfg.min_spread)?;
    let modularity = modularity(&cofaction.adjacency, &clustering.clusters)?;
    Ok(FollowershipStage {
        cofaction,
        leadfollow,
        clustering,
        modularity,
    })
}

/// Everything the chain produces, significance tests excepted.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub network: DynamicFollowingNetwork,
    pub leaders: LeaderSeries,
    pub factions: FactionSeries,
    pub diagram: DiagramStage,
    pub sequences: SequenceReport,
    pub followership: FollowershipStage,
}

pub fn run_pipeline(ds: &Dataset, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let network = infer_network(ds, cfg)?;
    let (leaders, factions) = leader_series(&network);
    let diagram = diagram_stage(&leaders, cfg)?;
    let sequences = mine_sequences(&diagram.diagram, &diagram.seq, cfg.occurrence);
    let followership = followership_stage(&factions, &network.ids, cfg)?;
    Ok(PipelineOutput {
        network,
        leaders,
        factions,
        diagram,
        sequences,
        followership,
    })
}

impl PipelineOutput {
    pub fn significance_input<'a>(&'a self, cfg: &PipelineConfig) -> SignificanceInput<'a> {
        SignificanceInput {
            series: &self.leaders,
            diagram: &self.diagram.diagram,
            seq: &self.diagram.seq,
            phi: cfg.phi,
            fit: cfg.fit,
            occurrence: cfg.occurrence,
        }
    }

    /// Runs both null-model protocols.
    pub fn significance(&self, cfg: &PipelineConfig) -> Result<[RejectionReport; 2]> {
        let input = self.significance_input(cfg);
        let proto = cfg.protocol();
        Ok([
            significance_protocol(NullKind::EdgeWeight, &input, &proto)?,
            significance_protocol(NullKind::SequenceSupport, &input, &proto)?,
        ])
    }

    /// Both protocols with the observed sample replaced by a null draw.
    pub fn calibration(&self, cfg: &PipelineConfig) -> Result<[RejectionReport; 2]> {
        let input = self.significance_input(cfg);
        let proto = cfg.protocol();
        Ok([
            calibration_protocol(NullKind::EdgeWeight, &input, &proto)?,
            calibration_protocol(NullKind::SequenceSupport, &input, &proto)?,
        ])
    }
}
