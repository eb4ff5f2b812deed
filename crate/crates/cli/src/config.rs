use std::path::{Path, PathBuf};

use clap::Args;
use leadfollow::pipeline::{Backend, PipelineConfig};
use leadfollow::sequence::OccurrenceCount;
use leadfollow::{Error, ErrorClass};
use serde::Deserialize;

use crate::Failure;

/// Pipeline settings as they may appear in a TOML or JSON config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSettings {
    pub omega: Option<usize>,
    pub delta: Option<usize>,
    pub sigma: Option<f64>,
    pub phi: Option<f64>,
    pub phi_co: Option<f64>,
    pub phi_lf: Option<f64>,
    pub alpha: Option<f64>,
    pub backend: Option<Backend>,
    pub seed: Option<u64>,
    pub repetitions: Option<usize>,
    pub min_spread: Option<f64>,
    pub occurrence: Option<OccurrenceCount>,
    pub band: Option<usize>,
    pub input: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

/// Parses a config file; `.json` files as JSON, anything else as TOML.
pub fn load_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(ErrorClass::Config, format!("cannot read config {}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| Failure::new(ErrorClass::Config, format!("invalid config {}: {e}", path.display())))
}

/// Thresholds and window settings shared by the analysis commands. Every
/// flag can also be set through a `LEADFOLLOW_*` environment variable; flags
/// and variables override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// TOML or JSON file with pipeline settings.
    #[arg(long, env = "LEADFOLLOW_CONFIG")]
    pub config: Option<PathBuf>,
    /// Window length in time steps. Required for network inference: choose it
    /// at least as long as the largest following delay you expect in the data.
    #[arg(long, env = "LEADFOLLOW_OMEGA")]
    pub omega: Option<usize>,
    /// Window slide; defaults to a tenth of omega.
    #[arg(long, env = "LEADFOLLOW_DELTA")]
    pub delta: Option<usize>,
    /// Minimum |f| for a following edge.
    #[arg(long, env = "LEADFOLLOW_SIGMA")]
    pub sigma: Option<f64>,
    /// Minimum support of a frequent leader set.
    #[arg(long, env = "LEADFOLLOW_PHI")]
    pub phi: Option<f64>,
    /// Co-faction edge threshold.
    #[arg(long, env = "LEADFOLLOW_PHI_CO")]
    pub phi_co: Option<f64>,
    /// Lead-follow edge threshold.
    #[arg(long, env = "LEADFOLLOW_PHI_LF")]
    pub phi_lf: Option<f64>,
    /// Significance level of the tests.
    #[arg(long, env = "LEADFOLLOW_ALPHA")]
    pub alpha: Option<f64>,
    #[arg(long, env = "LEADFOLLOW_BACKEND")]
    pub backend: Option<Backend>,
    /// Seed for randomised stages; one is generated and logged when absent.
    #[arg(long, env = "LEADFOLLOW_SEED")]
    pub seed: Option<u64>,
    /// Null-model repetitions.
    #[arg(long, env = "LEADFOLLOW_REPETITIONS")]
    pub repetitions: Option<usize>,
    /// Dendrograms whose merge heights spread less than this give one cluster.
    #[arg(long, env = "LEADFOLLOW_MIN_SPREAD")]
    pub min_spread: Option<f64>,
    /// Sakoe-Chiba band for DTW.
    #[arg(long, env = "LEADFOLLOW_BAND")]
    pub band: Option<usize>,
}

/// Resolved settings plus the paths that may come from the config file.
pub struct Resolved {
    pub pipeline: PipelineConfig,
    pub seed_given: bool,
    pub input: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl ParamArgs {
    /// Merges file, environment and flags. Stages that slide windows pass
    /// `need_omega`; the others get a placeholder window they never use.
    pub fn resolve(&self, need_omega: bool) -> Result<Resolved, Failure> {
        let file: FileSettings = match &self.config {
            Some(p) => load_file(p)?,
            None => FileSettings::default(),
        };
        let omega = self.omega.or(file.omega);
        let omega = match (omega, need_omega) {
            (Some(w), _) => w,
            (None, false) => 1,
            (None, true) => {
                return Err(Failure::new(
                    ErrorClass::Config,
                    "omega is required (--omega, LEADFOLLOW_OMEGA or the config file); \
                     pick a window at least as long as the largest following delay you expect",
                ))
            }
        };
        let mut cfg = PipelineConfig::new(omega);
        cfg.delta = self.delta.or(file.delta);
        macro_rules! pick {
            ($($f:ident),*) => {$(
                if let Some(v) = self.$f.or(file.$f) {
                    cfg.$f = v;
                }
            )*};
        }
        pick!(sigma, phi, phi_co, phi_lf, alpha, backend, repetitions, min_spread);
        if let Some(o) = file.occurrence {
            cfg.occurrence = o;
        }
        cfg.band = self.band.or(file.band);
        let seed = self.seed.or(file.seed);
        cfg.seed = seed.unwrap_or(0);
        cfg.validate().map_err(Failure::from)?;
        Ok(Resolved {
            pipeline: cfg,
            seed_given: seed.is_some(),
            input: file.input,
            out_dir: file.out_dir,
        })
    }
}

impl Resolved {
    /// Fills in a fresh seed when none was configured and logs it.
    pub fn ensure_seed(&mut self) {
        if !self.seed_given {
            self.pipeline.seed = fresh_seed();
            self.seed_given = true;
            eprintln!("no seed given, using seed {}", self.pipeline.seed);
        }
    }
}

pub fn fresh_seed() -> u64 {
    use std::time::{SystemTime, UNIX_EPOCH};
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos());
    (nanos as u64) ^ u64::from(std::process::id()).rotate_left(32)
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(e.class(), e.to_string())
    }
}
