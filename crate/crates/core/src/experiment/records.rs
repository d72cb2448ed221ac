use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::evolution::{Fitness, Individual};
use crate::sim::{evaluate_noisy, NoiseModel, StateVector};

/// One individual as a JSONL line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationRecord {
    /// Circuit in the line-based text format.
    pub circuit: String,
    pub cost: u64,
    pub cnot_count: usize,
    pub fidelity: f64,
    #[serde(default)]
    pub noisy_fidelity: Option<f64>,
    #[serde(default)]
    pub rank: Option<usize>,
}

impl PopulationRecord {
    pub fn from_individual(ind: &Individual) -> Result<Self> {
        let fit = ind.fitness.ok_or(Error::MissingFitness(0))?;
        Ok(Self {
            circuit: ind.circuit.to_text(),
            cost: fit.cost,
            cnot_count: ind.circuit.cnot_count(),
            fidelity: fit.fidelity,
            noisy_fidelity: ind.noisy_fidelity,
            rank: ind.rank,
        })
    }

    /// Parses the circuit and checks that the stored cost and CX count agree
    /// with it.
    pub fn to_individual(&self) -> Result<Individual> {
        let circuit: Circuit = self.circuit.parse()?;
        if circuit.cost() != self.cost || circuit.cnot_count() != self.cnot_count {
            return Err(Error::InvalidCircuit(format!(
                "record says cost {} / {} CX, circuit has {} / {}",
                self.cost,
                self.cnot_count,
                circuit.cost(),
                circuit.cnot_count()
            )));
        }
        for (name, f) in [("fidelity", Some(self.fidelity)), ("noisy_fidelity", self.noisy_fidelity)] {
            if let Some(f) = f {
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::Domain(format!("{name} {f} outside [0, 1]")));
                }
            }
        }
        Ok(Individual {
            fitness: Some(Fitness::new(self.cost, self.fidelity)),
            rank: self.rank,
            noisy_fidelity: self.noisy_fidelity,
            ..Individual::new(circuit)
        })
    }
}

pub fn population_to_jsonl(pop: &[Individual]) -> Result<String> {
    let mut out = String::new();
    for (i, ind) in pop.iter().enumerate() {
        let record = PopulationRecord::from_individual(ind).map_err(|_| Error::MissingFitness(i))?;
        out.push_str(&serde_json::to_string(&record).expect("plain data serializes"));
        out.push('\n');
    }
    Ok(out)
}

/// Reads one record per non-blank line.
pub fn parse_population_jsonl(text: &str) -> Result<Vec<PopulationRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| serde_json::from_str(line).map_err(|e| Error::parse(i + 1, e.to_string())))
        .collect()
}

/// Parses the records and rebuilds the individuals.
pub fn read_population_jsonl(text: &str) -> Result<Vec<Individual>> {
    parse_population_jsonl(text)?.iter().map(PopulationRecord::to_individual).collect()
}

/// One row of a front CSV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontRow {
    pub cnot_count: usize,
    pub cost: u64,
    pub noiseless_f: f64,
    pub noisy_f: f64,
}

pub const FRONT_CSV_HEADER: &str = "cnot_count,cost,noiseless_f,noisy_f";

/// Front members as CSV rows sorted by CX count (then cost). Noisy
/// fidelities already stored on the individuals are reused; missing ones are
/// simulated against `target`.
pub fn export_front_csv(front: &[Individual], target: &StateVector, noise: &NoiseModel) -> Result<String> {
    let mut rows = Vec::with_capacity(front.len());
    for (i, ind) in front.iter().enumerate() {
        let fit = ind.fitness.ok_or(Error::MissingFitness(i))?;
        let noisy_f = match ind.noisy_fidelity {
            Some(f) => f,
            None => evaluate_noisy(&ind.circuit, target, noise)?,
        };
        rows.push(FrontRow { cnot_count: ind.circuit.cnot_count(), cost: fit.cost, noiseless_f: fit.fidelity, noisy_f });
    }
    rows.sort_by(|a, b| a.cnot_count.cmp(&b.cnot_count).then(a.cost.cmp(&b.cost)));
    Ok(front_rows_to_csv(&rows))
}

pub fn front_rows_to_csv(rows: &[FrontRow]) -> String {
    let mut out = format!("{FRONT_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.cnot_count, r.cost, r.noiseless_f, r.noisy_f);
    }
    out
}

pub fn parse_front_csv(text: &str) -> Result<Vec<FrontRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == FRONT_CSV_HEADER => {}
        Some((i, _)) => return Err(Error::parse(i + 1, format!("expected header {FRONT_CSV_HEADER:?}"))),
        None => return Err(Error::parse(0, "empty front CSV")),
    }
    lines
        .map(|(i, line)| {
            let line_no = i + 1;
            let fields: Vec<&str> = line.trim().split(',').collect();
            let [cx, cost, f, nf] = fields.as_slice() else {
                return Err(Error::parse(line_no, format!("expected 4 fields, found {}", fields.len())));
            };
            let prob = |s: &str| -> Result<f64> {
                let v: f64 = s.parse().map_err(|_| Error::parse(line_no, format!("bad number {s:?}")))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::parse(line_no, format!("fidelity {v} outside [0, 1]")));
                }
                Ok(v)
            };
            Ok(FrontRow {
                cnot_count: cx.parse().map_err(|_| Error::parse(line_no, format!("bad CX count {cx:?}")))?,
                cost: cost.parse().map_err(|_| Error::parse(line_no, format!("bad cost {cost:?}")))?,
                noiseless_f: prob(f)?,
                noisy_f: prob(nf)?,
            })
        })
        .collect()
}
