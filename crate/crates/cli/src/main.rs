//! `evoprep` command-line driver.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "evoprep", version, about = "Evolutionary state-preparation experiments")]
pub struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write Haar-random target states as text files.
    SampleStates {
        /// Qubits per state.
        #[arg(long)]
        n: Option<usize>,
        /// Number of states.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Build the exact baseline circuit for a target.
    PrepareBaseline {
        /// Target state file.
        #[arg(long)]
        target: PathBuf,
        /// Preset name or edge-list file.
        #[arg(long)]
        coupling: Option<String>,
    },
    /// Run the genetic algorithm on one target.
    Evolve(EvolveArgs),
    /// Noiseless and noisy fidelity of a circuit or a population.
    Evaluate {
        /// Target state file.
        #[arg(long)]
        target: PathBuf,
        /// Circuit text file.
        #[arg(long, conflicts_with = "population", required_unless_present = "population")]
        circuit: Option<PathBuf>,
        /// Population JSONL file.
        #[arg(long)]
        population: Option<PathBuf>,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Analytic fidelity model.
    Theory {
        #[command(subcommand)]
        mode: TheoryMode,
    },
    /// Run the full experiment and write the comparison report.
    Run,
    /// Summarize an existing experiment directory.
    Report {
        /// Directory holding report.json (defaults to the output directory).
        #[arg(long)]
        dir: Option<PathBuf>,
        /// Histogram bins for the delta distributions.
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
}

#[derive(Args, Debug)]
pub struct NoiseArgs {
    /// Single-qubit depolarizing probability.
    #[arg(long)]
    pub p1: Option<f64>,
    /// CX depolarizing probability.
    #[arg(long)]
    pub p2: Option<f64>,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    /// Target state file.
    #[arg(long)]
    pub target: PathBuf,
    /// Preset name or edge-list file.
    #[arg(long)]
    pub coupling: Option<String>,
    /// Extra circuit files for the initial population.
    #[arg(long = "seed-circuit")]
    pub seed_circuits: Vec<PathBuf>,
    /// Do not seed the population with the exact baseline.
    #[arg(long)]
    pub no_baseline: bool,
    /// Population size.
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    /// Expected mutation count per offspring.
    #[arg(long)]
    pub emc: Option<f64>,
    /// Continuous mutation width.
    #[arg(long)]
    pub cmw: Option<f64>,
    /// Expected length of inserted gate sequences.
    #[arg(long)]
    pub esl: Option<f64>,
    /// Fraction of the population kept as elites.
    #[arg(long)]
    pub elite_fraction: Option<f64>,
    /// Longest allowed circuit, in gates.
    #[arg(long)]
    pub max_len: Option<usize>,
    #[command(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Subcommand, Debug)]
pub enum TheoryMode {
    /// CSV of the noiseless bound and total fidelity against l.
    Curves {
        /// Qubits.
        #[arg(long)]
        n: usize,
        /// CX error rate.
        #[arg(long)]
        p: f64,
        /// Comma-separated l_ph values.
        #[arg(long, value_delimiter = ',', default_value = "1.8,2.8,3.8,4.8,5.8")]
        lph: Vec<f64>,
        /// Largest l in the table.
        #[arg(long, default_value_t = 100, conflicts_with = "front")]
        max_l: usize,
        /// Align the l axis with this front CSV.
        #[arg(long)]
        front: Option<PathBuf>,
    },
    /// Fit l_ph to a Pareto front.
    Fit {
        /// Front or population JSONL.
        #[arg(long)]
        front: PathBuf,
        /// Qubits (read from the front when omitted).
        #[arg(long)]
        n: Option<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
