//! End-to-end experiment driver: Haar targets, exact baselines, seeded GA
//! runs, noisy evaluation and improvement statistics.
//!
//! Every output file except `manifest.json` is a deterministic function of
//! the configuration.

mod records;
mod stats;

pub use records::{
    export_front_csv, front_rows_to_csv, parse_front_csv, parse_population_jsonl, population_to_jsonl,
    read_population_jsonl, FrontRow, PopulationRecord, FRONT_CSV_HEADER,
};
pub use stats::{gaussian_fit, histogram, linear_fit, theory_curves, theory_overlay, Histogram, LinearFit, OVERLAY_CSV_HEADER};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{exact_prepare, MAX_BASELINE_QUBITS};
use crate::circuit::Circuit;
use crate::coupling::CouplingMap;
use crate::error::{Error, Result};
use crate::evolution::{evolve, pareto_front, GAConfig, Individual};
use crate::haar::{sample_haar_state, Domain, RngSeed};
use crate::sim::{circuit_fidelity, evaluate_noisy, NoiseModel, StateVector, MAX_DENSITY_QUBITS};

fn default_n_qubits() -> usize {
    4
}
fn default_state_count() -> usize {
    20
}
fn default_runs() -> usize {
    1
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

/// Experiment settings, read from TOML. The GA seed inside `ga` is ignored;
/// each run gets a seed derived from `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_n_qubits")]
    pub n_qubits: usize,
    #[serde(default = "default_state_count")]
    pub state_count: usize,
    /// Preset name or edge-list file; defaults to `line-<n_qubits>`.
    #[serde(default)]
    pub coupling: Option<String>,
    #[serde(default)]
    pub ga: GAConfig,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default = "default_runs")]
    pub runs_per_state: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: RngSeed,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_qubits: default_n_qubits(),
            state_count: default_state_count(),
            coupling: None,
            ga: GAConfig::default(),
            noise: NoiseModel::default(),
            runs_per_state: default_runs(),
            output_dir: default_output_dir(),
            seed: RngSeed::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates TOML text. Relative coupling files are looked up
    /// from the working directory.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a TOML file. A relative coupling path that exists next to the
    /// file is resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: Self = toml::from_str(&text).map_err(|e| Error::Config(e.message().to_string()))?;
        if let (Some(spec), Some(dir)) = (&config.coupling, path.parent()) {
            let beside = dir.join(spec);
            if Path::new(spec).is_relative() && beside.is_file() {
                config.coupling = Some(beside.display().to_string());
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn coupling_spec(&self) -> String {
        self.coupling.clone().unwrap_or_else(|| format!("line-{}", self.n_qubits))
    }

    pub fn coupling_map(&self) -> Result<CouplingMap> {
        let spec = self.coupling_spec();
        CouplingMap::load(&spec).map_err(|e| {
            if spec.contains(['/', '\\']) || spec.ends_with(".txt") {
                Error::Config(format!("coupling file {spec:?} not found or invalid: {e}"))
            } else {
                e
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let max_n = MAX_DENSITY_QUBITS.min(MAX_BASELINE_QUBITS);
        if !(2..=max_n).contains(&self.n_qubits) {
            return bad(format!("n_qubits must lie in 2..={max_n}"));
        }
        if self.state_count == 0 || self.state_count > u32::MAX as usize {
            return bad("state_count must be at least 1".into());
        }
        if self.runs_per_state == 0 || self.runs_per_state > u16::MAX as usize {
            return bad("runs_per_state must lie in 1..=65535".into());
        }
        self.ga.validate()?;
        NoiseModel::new(self.noise.p1, self.noise.p2).map_err(|e| Error::Config(e.to_string()))?;
        let map = self.coupling_map()?;
        if map.n_qubits() != self.n_qubits {
            return bad(format!("coupling map has {} qubits, n_qubits is {}", map.n_qubits(), self.n_qubits));
        }
        Ok(())
    }

    /// Target for state `index`.
    pub fn target(&self, index: usize) -> Result<StateVector> {
        sample_haar_state(self.n_qubits, &mut self.seed.stream(Domain::Targets, index as u64))
    }

    /// GA settings for one run of one state.
    pub fn run_config(&self, state: usize, run: usize) -> GAConfig {
        let seed = self.seed.derive(Domain::Evolution, ((state as u64) << 16) | run as u64);
        GAConfig { seed, ..self.ga.clone() }
    }
}

/// Outcome of one completed state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateResult {
    pub baseline_cnots: usize,
    pub baseline_cost: u64,
    pub baseline_fidelity: f64,
    pub baseline_noisy: f64,
    pub ga_best_cnots: usize,
    pub ga_best_cost: u64,
    pub ga_best_fidelity: f64,
    pub ga_best_noisy: f64,
    pub abs_delta: f64,
    pub rel_delta: f64,
    pub front_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub index: usize,
    /// Error message of a state that could not be completed.
    pub skipped: Option<String>,
    pub result: Option<StateResult>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub max: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Option<Self> {
        let (mean, std) = gaussian_fit(values).ok()?;
        Some(Self { mean, std, max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max) })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub completed: usize,
    pub skipped: usize,
    /// States where the GA's best noisy fidelity beats the baseline.
    pub improved: usize,
    /// States where that front member uses fewer CX than the baseline.
    pub fewer_cnots: usize,
    pub abs_delta: Option<Summary>,
    pub rel_delta: Option<Summary>,
}

impl Aggregate {
    pub fn from_states(states: &[StateReport]) -> Self {
        let done: Vec<&StateResult> = states.iter().filter_map(|s| s.result.as_ref()).collect();
        let abs: Vec<f64> = done.iter().map(|r| r.abs_delta).collect();
        let rel: Vec<f64> = done.iter().map(|r| r.rel_delta).collect();
        Self {
            completed: done.len(),
            skipped: states.len() - done.len(),
            improved: done.iter().filter(|r| r.ga_best_noisy > r.baseline_noisy).count(),
            fewer_cnots: done.iter().filter(|r| r.ga_best_cnots < r.baseline_cnots).count(),
            abs_delta: Summary::of(&abs),
            rel_delta: Summary::of(&rel),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub n_qubits: usize,
    pub state_count: usize,
    pub runs_per_state: usize,
    pub population_size: usize,
    pub generations: usize,
    pub coupling: String,
    pub noise: NoiseModel,
    pub seed: RngSeed,
    pub states: Vec<StateReport>,
    pub aggregate: Aggregate,
}

impl ComparisonReport {
    pub fn all_completed(&self) -> bool {
        self.states.iter().all(|s| s.result.is_some())
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("plain data serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
    }

    /// Fixed-width table of the per-state rows and the aggregates.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "n = {}, {} states x {} run(s), population {}, {} generations, coupling {}, p1 = {}, p2 = {}, seed {}",
            self.n_qubits,
            self.state_count,
            self.runs_per_state,
            self.population_size,
            self.generations,
            self.coupling,
            self.noise.p1,
            self.noise.p2,
            self.seed.0
        );
        let _ = writeln!(
            out,
            "{:>5} {:>7} {:>10} {:>7} {:>10} {:>10} {:>9} {:>6}",
            "state", "base_cx", "base_noisy", "ga_cx", "ga_noisy", "abs_delta", "rel_delta", "front"
        );
        for s in &self.states {
            match (&s.result, &s.skipped) {
                (Some(r), _) => {
                    let _ = writeln!(
                        out,
                        "{:>5} {:>7} {:>10.6} {:>7} {:>10.6} {:>+10.6} {:>+8.2}% {:>6}",
                        s.index,
                        r.baseline_cnots,
                        r.baseline_noisy,
                        r.ga_best_cnots,
                        r.ga_best_noisy,
                        r.abs_delta,
                        100.0 * r.rel_delta,
                        r.front_size
                    );
                }
                (None, reason) => {
                    let _ = writeln!(out, "{:>5} skipped: {}", s.index, reason.as_deref().unwrap_or("unknown error"));
                }
            }
        }
        let a = &self.aggregate;
        let _ = writeln!(
            out,
            "completed {}/{}, improved {}, fewer CX {}",
            a.completed,
            self.states.len(),
            a.improved,
            a.fewer_cnots
        );
        if let (Some(abs), Some(rel)) = (a.abs_delta, a.rel_delta) {
            let _ = writeln!(out, "abs delta: mean {:+.6}, std {:.6}, max {:+.6}", abs.mean, abs.std, abs.max);
            let _ = writeln!(
                out,
                "rel delta: mean {:+.2}%, std {:.2}%, max {:+.2}%",
                100.0 * rel.mean,
                100.0 * rel.std,
                100.0 * rel.max
            );
        }
        out
    }
}

/// Everything produced for one state.
#[derive(Clone, Debug)]
pub struct StateArtifacts {
    pub target: StateVector,
    pub baseline: Circuit,
    pub front: Vec<Individual>,
    pub result: StateResult,
}

/// Member of `front` with the highest noisy fidelity; fewer CX wins ties.
pub fn best_noisy_member(front: &[Individual]) -> Option<&Individual> {
    front.iter().filter(|i| i.noisy_fidelity.is_some()).min_by(|a, b| {
        let (fa, fb) = (a.noisy_fidelity.unwrap_or(0.0), b.noisy_fidelity.unwrap_or(0.0));
        fb.total_cmp(&fa).then(a.circuit.cnot_count().cmp(&b.circuit.cnot_count()))
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn state_dir(output_dir: &Path, index: usize) -> PathBuf {
    output_dir.join(format!("state_{index:03}"))
}

/// Runs one state and writes its files into `dir`.
pub fn run_state(config: &ExperimentConfig, map: &CouplingMap, index: usize, dir: &Path) -> Result<StateArtifacts> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let target = config.target(index)?;
    write(&dir.join("target.txt"), &target.to_text())?;
    let baseline = exact_prepare(&target, map)?.clean();
    write(&dir.join("baseline.txt"), &baseline.to_text())?;
    let baseline_fidelity = circuit_fidelity(&baseline, &target)?;
    let baseline_noisy = evaluate_noisy(&baseline, &target, &config.noise)?;

    let mut merged = Vec::with_capacity(config.runs_per_state * config.ga.population_size);
    for run in 0..config.runs_per_state {
        let ga = config.run_config(index, run);
        let (pop, logbook) = evolve(&target, std::slice::from_ref(&baseline), &ga, map, &config.noise)?;
        write(&dir.join(format!("logbook_run{run:02}.csv")), &logbook.to_csv())?;
        write(&dir.join(format!("population_run{run:02}.jsonl")), &population_to_jsonl(&pop)?)?;
        merged.extend(pop);
    }
    let front = pareto_front(&merged)?;
    write(&dir.join("front.jsonl"), &population_to_jsonl(&front)?)?;
    write(&dir.join("front.csv"), &export_front_csv(&front, &target, &config.noise)?)?;

    let best = best_noisy_member(&front).ok_or(Error::EmptyPopulation)?;
    let ga_best_noisy = best.noisy_fidelity.expect("filtered on presence");
    let abs_delta = ga_best_noisy - baseline_noisy;
    let result = StateResult {
        baseline_cnots: baseline.cnot_count(),
        baseline_cost: baseline.cost(),
        baseline_fidelity,
        baseline_noisy,
        ga_best_cnots: best.circuit.cnot_count(),
        ga_best_cost: best.circuit.cost(),
        ga_best_fidelity: best.fitness.map_or(0.0, |f| f.fidelity),
        ga_best_noisy,
        abs_delta,
        rel_delta: abs_delta / baseline_noisy,
        front_size: front.len(),
    };
    Ok(StateArtifacts { target, baseline, front, result })
}

/// Runs every state (in parallel), then writes `report.json`, `report.txt`
/// and `manifest.json` into the output directory. States that fail are
/// logged and marked as skipped.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ComparisonReport> {
    config.validate()?;
    let map = config.coupling_map()?;
    let out = &config.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let states: Vec<StateReport> = (0..config.state_count)
        .into_par_iter()
        .map(|index| match run_state(config, &map, index, &state_dir(out, index)) {
            Ok(a) => {
                log::info!(
                    "state {index}: baseline {} CX / noisy {:.6}, GA {} CX / noisy {:.6}",
                    a.result.baseline_cnots,
                    a.result.baseline_noisy,
                    a.result.ga_best_cnots,
                    a.result.ga_best_noisy
                );
                StateReport { index, skipped: None, result: Some(a.result) }
            }
            Err(e) => {
                log::error!("state {index} skipped: {e}");
                StateReport { index, skipped: Some(e.to_string()), result: None }
            }
        })
        .collect();
    let report = ComparisonReport {
        n_qubits: config.n_qubits,
        state_count: config.state_count,
        runs_per_state: config.runs_per_state,
        population_size: config.ga.population_size,
        generations: config.ga.generations,
        coupling: config.coupling_spec(),
        noise: config.noise,
        seed: config.seed,
        aggregate: Aggregate::from_states(&states),
        states,
    };
    write(&out.join("report.json"), &report.to_json())?;
    write(&out.join("report.txt"), &report.to_table())?;
    write_manifest(out)?;
    Ok(report)
}

#[derive(Serialize)]
struct Manifest {
    created_unix_seconds: u64,
    version: &'static str,
    files: Vec<String>,
}

fn list_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            list_files(root, &path, out)?;
        } else if path.file_name().is_some_and(|n| n != "manifest.json") {
            out.push(path.strip_prefix(root).unwrap_or(&path).display().to_string());
        }
    }
    Ok(())
}

fn write_manifest(out: &Path) -> Result<()> {
    let mut files = Vec::new();
    list_files(out, out, &mut files)?;
    files.sort();
    let created_unix_seconds =
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let manifest = Manifest { created_unix_seconds, version: env!("CARGO_PKG_VERSION"), files };
    write(&out.join("manifest.json"), &serde_json::to_string_pretty(&manifest).expect("plain data serializes"))
}
