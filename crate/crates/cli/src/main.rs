use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use leadfollow::ErrorClass;

mod commands;
mod config;

use commands::*;

/// Leadership and followership dynamics mining for multi-individual movement data.
#[derive(Debug, Parser)]
#[command(name = "leadfollow", version, propagate_version = true)]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "LEADFOLLOW_WORKERS")]
    workers: Option<usize>,
    /// Suppress progress messages on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic trajectories with known leadership.
    Simulate(SimulateArgs),
    /// Build one following network per sliding window.
    InferNetwork(InferArgs),
    /// Extract faction initiators and factions from a network series.
    Leaders(LeadersArgs),
    /// Fit the leadership dynamics diagram over frequent leader sets.
    Diagram(DiagramArgs),
    /// Mine the most probable leadership sequences and their support.
    Sequences(SequencesArgs),
    /// Test the diagram against null models.
    Test(TestArgs),
    /// Build the co-faction and lead-follow networks.
    Followership(FollowershipArgs),
    /// Cluster individuals by co-faction support.
    Cluster(ClusterArgs),
    /// Run a simulation grid and score every replica against ground truth.
    Evaluate(EvaluateArgs),
    /// Run every analysis stage on one dataset.
    Pipeline(PipelineArgs),
}

/// A failed command: its class decides the exit code.
#[derive(Debug)]
pub struct Failure {
    pub class: ErrorClass,
    pub message: String,
}

impl Failure {
    pub fn new(class: ErrorClass, message: impl Into<String>) -> Self {
        Failure {
            class,
            message: message.into(),
        }
    }
}

pub type CmdResult = Result<(), Failure>;

/// Progress reporting on stderr.
#[derive(Debug, Clone, Copy)]
pub struct Log {
    quiet: bool,
}

impl Log {
    pub fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    pub fn wrote(&self, path: &PathBuf) {
        self.info(format!("wrote {}", path.display()));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let log = Log { quiet: cli.quiet };
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: cannot start {w} workers: {e}");
            return ExitCode::from(ErrorClass::Config.exit_code() as u8);
        }
    }
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, log),
        Command::InferNetwork(a) => infer_network(a, log),
        Command::Leaders(a) => leaders(a, log),
        Command::Diagram(a) => diagram(a, log),
        Command::Sequences(a) => sequences(a, log),
        Command::Test(a) => test(a, log),
        Command::Followership(a) => followership(a, log),
        Command::Cluster(a) => cluster(a, log),
        Command::Evaluate(a) => evaluate(a, log),
        Command::Pipeline(a) => pipeline(a, log),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.class.exit_code() as u8)
        }
    }
}
