//! Leadership inference for collectively moving groups.
//!
//! Trajectories are cut into sliding windows, pairwise following is inferred
//! with dynamic time warping, and the resulting networks are summarised as
//! leader sets, a leadership dynamics diagram, frequent leadership sequences,
//! and followership structure.

pub mod cluster;
pub mod data;
pub mod dtw;
pub mod dynamics;
pub mod error;
pub mod eval;
pub mod export;
pub mod faction;
pub mod followership;
pub mod network;
pub mod pipeline;
pub mod sequence;
pub mod significance;
pub mod sim;
pub mod stats;

pub use data::{CsvSchema, Dataset, DatasetMeta, GapPolicy, IndividualId, Point, Trajectory, WindowSpec};
pub use dtw::{dtw_path, follow_score, DtwBuffer, FollowScore, Kernel, WarpingPath};
pub use dynamics::{infer_diagram, DynamicsDiagram, FitOptions, LeaderSetSupport};
pub use error::{Error, ErrorClass, Result};
pub use faction::{Faction, FactionSeries, LeaderSeries, LeaderSet};
pub use network::{DynamicFollowingNetwork, Edge, FollowingNetwork, FollowingParams};
pub use sequence::{mine_sequences, LeaderPath, OccurrenceCount, SequenceReport};
pub use significance::{calibration_protocol, significance_protocol, NullKind, ProtocolConfig, RejectionReport, SignificanceInput};
pub use stats::{TestResult, TestTriple};
pub use cluster::{ClusterSet, Clustering, Dendrogram, Merge};
pub use followership::{CofactionNetwork, LeadFollowEdge, LeadFollowNetwork};
pub use eval::{run_experiment, BatchReport, ExperimentConfig, ReplicaMetrics};
pub use pipeline::{run_pipeline, DEFAULT_MIN_SPREAD, Backend, PipelineConfig, PipelineOutput};
pub use sim::{simulate, Dynamics, GroundTruth, IcParams, Model, ScenarioSpec};
