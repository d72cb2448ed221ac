//! Multi-objective genetic algorithm over native circuits.
//!
//! Individuals are ranked by NSGA-2 on (cost, noiseless fidelity). Each
//! generation keeps the elites and fills the rest of the population with
//! offspring of rank-selected parents.

mod nsga;
pub mod operators;

pub use nsga::{crowding_distance, dominates, nondominated_sort, select_elites, select_parent, RankSelector};
pub use operators::{Operator, OperatorContext};

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{cnot_upper_bound, Circuit};
use crate::coupling::CouplingMap;
use crate::error::{Error, Result};
use crate::haar::{random_circuit, Domain, RngSeed};
use crate::sim::{circuit_fidelity, evaluate_noisy, NoiseModel, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fitness {
    pub cost: u64,
    pub fidelity: f64,
}

/// Fidelities are stored on a grid of this spacing so that values equal
/// up to round-off compare as ties.
pub const FIDELITY_RESOLUTION: f64 = 1e-12;

impl Fitness {
    pub fn new(cost: u64, fidelity: f64) -> Self {
        let fidelity = ((fidelity / FIDELITY_RESOLUTION).round() * FIDELITY_RESOLUTION).clamp(0.0, 1.0);
        Self { cost, fidelity }
    }

    /// ε = √(1 − F).
    pub fn error(&self) -> f64 {
        (1.0 - self.fidelity).max(0.0).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub circuit: Circuit,
    pub fitness: Option<Fitness>,
    pub rank: Option<usize>,
    pub crowding: f64,
    /// Filled in for the final population only.
    pub noisy_fidelity: Option<f64>,
}

impl Individual {
    pub fn new(circuit: Circuit) -> Self {
        Self { circuit, fitness: None, rank: None, crowding: 0.0, noisy_fidelity: None }
    }

    pub fn evaluated(circuit: Circuit, target: &StateVector) -> Result<Self> {
        let mut ind = Self::new(circuit);
        ind.evaluate(target)?;
        Ok(ind)
    }

    pub fn evaluate(&mut self, target: &StateVector) -> Result<()> {
        let fidelity = circuit_fidelity(&self.circuit, target)?;
        self.fitness = Some(Fitness::new(self.circuit.cost(), fidelity));
        Ok(())
    }

    fn fit(&self) -> Fitness {
        self.fitness.expect("evaluated individual")
    }
}

fn default_population() -> usize {
    100
}
fn default_generations() -> usize {
    2000
}
fn default_intensity() -> f64 {
    2.0
}
fn default_elite_fraction() -> f64 {
    0.1
}
fn default_initial_len() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GAConfig {
    #[serde(default = "default_population")]
    pub population_size: usize,
    #[serde(default = "default_generations")]
    pub generations: usize,
    #[serde(default = "default_intensity")]
    pub emc: f64,
    #[serde(default = "default_intensity")]
    pub cmw: f64,
    #[serde(default = "default_intensity")]
    pub esl: f64,
    #[serde(default = "default_elite_fraction")]
    pub elite_fraction: f64,
    /// Defaults to 20·C_ub(n).
    #[serde(default)]
    pub max_circuit_len: Option<usize>,
    /// Random initial individuals get a uniform length in 1..=initial_len.
    #[serde(default = "default_initial_len")]
    pub initial_len: usize,
    #[serde(default)]
    pub seed: RngSeed,
}

impl Default for GAConfig {
    fn default() -> Self {
        Self {
            population_size: default_population(),
            generations: default_generations(),
            emc: default_intensity(),
            cmw: default_intensity(),
            esl: default_intensity(),
            elite_fraction: default_elite_fraction(),
            max_circuit_len: None,
            initial_len: default_initial_len(),
            seed: RngSeed::default(),
        }
    }
}

impl GAConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.population_size < 2 {
            return bad("population_size must be at least 2");
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return bad("elite_fraction must lie in (0, 1)");
        }
        for (name, v) in [("emc", self.emc), ("cmw", self.cmw), ("esl", self.esl)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive"));
            }
        }
        if self.max_circuit_len == Some(0) {
            return bad("max_circuit_len must be positive");
        }
        Ok(())
    }

    pub fn max_len_for(&self, n: usize) -> usize {
        self.max_circuit_len
            .unwrap_or_else(|| 20 * cnot_upper_bound(n.max(2)).unwrap_or(1).max(1) as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub min_fidelity: f64,
    pub mean_fidelity: f64,
    pub max_fidelity: f64,
    pub min_cost: u64,
    pub mean_cost: f64,
    pub max_cost: u64,
    pub front_size: usize,
}

impl GenerationRecord {
    /// Statistics of a ranked population.
    pub fn from_population(generation: usize, pop: &[Individual]) -> Self {
        let n = pop.len() as f64;
        let fits: Vec<Fitness> = pop.iter().map(Individual::fit).collect();
        let fid = fits.iter().map(|f| f.fidelity);
        let cost = fits.iter().map(|f| f.cost);
        Self {
            generation,
            min_fidelity: fid.clone().fold(f64::INFINITY, f64::min),
            mean_fidelity: fid.clone().sum::<f64>() / n,
            max_fidelity: fid.fold(f64::NEG_INFINITY, f64::max),
            min_cost: cost.clone().min().unwrap_or(0),
            mean_cost: cost.clone().sum::<u64>() as f64 / n,
            max_cost: cost.max().unwrap_or(0),
            front_size: pop.iter().filter(|i| i.rank == Some(1)).count(),
        }
    }
}

/// Per-generation statistics; generation 0 is the initial population.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Logbook {
    pub records: Vec<GenerationRecord>,
}

impl Logbook {
    pub const CSV_HEADER: &'static str =
        "generation,min_fidelity,mean_fidelity,max_fidelity,min_cost,mean_cost,max_cost,front_size";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.generation,
                r.min_fidelity,
                r.mean_fidelity,
                r.max_fidelity,
                r.min_cost,
                r.mean_cost,
                r.max_cost,
                r.front_size
            );
        }
        out
    }

    pub fn max_fidelity_nondecreasing(&self) -> bool {
        self.records.windows(2).all(|w| w[1].max_fidelity >= w[0].max_fidelity)
    }
}

fn evaluate_all(pop: &mut [Individual], target: &StateVector) -> Result<()> {
    pop.par_iter_mut().try_for_each(|ind| ind.evaluate(target))
}

/// Applies one operator to parents drawn from `pop`, pushing one or two
/// children onto `out`.
pub fn apply_operator<R: Rng + ?Sized>(
    op: Operator,
    pop: &[Individual],
    selector: &RankSelector,
    ctx: &OperatorContext,
    rng: &mut R,
    out: &mut Vec<Individual>,
) {
    use operators::*;
    let parent = &pop[selector.sample(rng)];
    let c = &parent.circuit;
    let child = match op {
        Operator::DiscreteMutation => op1_discrete_uniform_mutation(c, ctx, rng),
        Operator::ContinuousMutation => op2_continuous_uniform_mutation(c, parent.fit().error(), ctx, rng),
        Operator::MoveGate => op3_move_gate(c, ctx, rng),
        Operator::InsertMutateInvert => op4_insert_mutate_invert(c, ctx, rng),
        Operator::SequenceInsertion => op5_sequence_insertion(c, ctx, rng),
        Operator::SequenceAndInverseInsertion => op6_sequence_and_inverse_insertion(c, ctx, rng),
        Operator::SequenceDeletion => op7_sequence_deletion(c, ctx, rng),
        Operator::SequenceReplacement => op8_sequence_replacement(c, ctx, rng),
        Operator::SequenceSwap => op9_sequence_swap(c, ctx, rng),
        Operator::SequenceScramble => op10_sequence_scramble(c, ctx, rng),
        Operator::Crossover => {
            let other = &pop[selector.sample(rng)].circuit;
            let (a, b) = op11_crossover(c, other, ctx, rng);
            out.push(Individual::new(a));
            b
        }
        Operator::Permutation => op12_permutation_mutation(c, ctx, rng),
        Operator::Clean => op13_clean(c),
    };
    out.push(Individual::new(child));
}

/// Elites plus evaluated offspring, ranked. Population size is preserved.
pub fn next_generation<R: Rng + ?Sized>(
    pop: &[Individual],
    target: &StateVector,
    config: &GAConfig,
    map: &CouplingMap,
    rng: &mut R,
) -> Result<Vec<Individual>> {
    let ctx = OperatorContext::new(config, map);
    let selector = RankSelector::new(pop)?;
    let elites = select_elites(pop, config.elite_fraction, rng)?;
    let want = pop.len() - elites.len();
    let mut offspring = Vec::with_capacity(want + 1);
    while offspring.len() < want {
        let op = Operator::ALL[rng.random_range(0..Operator::ALL.len())];
        apply_operator(op, pop, &selector, &ctx, rng, &mut offspring);
    }
    offspring.truncate(want);
    evaluate_all(&mut offspring, target)?;
    let mut next: Vec<Individual> = elites.iter().map(|&i| pop[i].clone()).collect();
    next.append(&mut offspring);
    nondominated_sort(&mut next)?;
    Ok(next)
}

/// Initial population: the seeds followed by random circuits.
pub fn initial_population<R: Rng + ?Sized>(
    seeds: &[Circuit],
    config: &GAConfig,
    map: &CouplingMap,
    rng: &mut R,
) -> Result<Vec<Individual>> {
    let n = map.n_qubits();
    for (i, s) in seeds.iter().enumerate() {
        if s.n_qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, found: s.n_qubits() });
        }
        if let Err(v) = s.validate(map) {
            return Err(Error::InvalidCircuit(format!("seed {i} violates the coupling map: {v:?}")));
        }
    }
    if seeds.len() > config.population_size {
        log::warn!("{} seeds for a population of {}; extra seeds dropped", seeds.len(), config.population_size);
    }
    let max_len = config.max_len_for(n);
    let mut pop: Vec<Individual> = seeds
        .iter()
        .take(config.population_size)
        .map(|s| {
            let mut gates = s.gates().to_vec();
            gates.truncate(max_len);
            Individual::new(Circuit::from_parts(n, gates, s.layout().to_vec()))
        })
        .collect();
    let top = config.initial_len.clamp(1, max_len);
    while pop.len() < config.population_size {
        let len = rng.random_range(1..=top);
        pop.push(Individual::new(random_circuit(n, len, map, rng)?));
    }
    Ok(pop)
}

/// Runs the genetic algorithm and returns the final ranked population, with
/// every circuit cleaned and noisy fidelities filled in, and the logbook.
pub fn evolve(
    target: &StateVector,
    seeds: &[Circuit],
    config: &GAConfig,
    map: &CouplingMap,
    noise: &NoiseModel,
) -> Result<(Vec<Individual>, Logbook)> {
    config.validate()?;
    if target.n_qubits() != map.n_qubits() {
        return Err(Error::DimensionMismatch { expected: map.n_qubits(), found: target.n_qubits() });
    }
    let mut rng: ChaCha20Rng = config.seed.stream(Domain::Evolution, 0);
    let mut pop = initial_population(seeds, config, map, &mut rng)?;
    evaluate_all(&mut pop, target)?;
    nondominated_sort(&mut pop)?;
    let mut logbook = Logbook::default();
    logbook.records.push(GenerationRecord::from_population(0, &pop));
    for generation in 1..=config.generations {
        pop = next_generation(&pop, target, config, map, &mut rng)?;
        let record = GenerationRecord::from_population(generation, &pop);
        log::trace!("generation {generation}: max F {:.6}, front {}", record.max_fidelity, record.front_size);
        logbook.records.push(record);
    }
    for ind in &mut pop {
        ind.circuit = ind.circuit.clean();
    }
    evaluate_all(&mut pop, target)?;
    nondominated_sort(&mut pop)?;
    pop.par_iter_mut().try_for_each(|ind| -> Result<()> {
        ind.noisy_fidelity = Some(evaluate_noisy(&ind.circuit, target, noise)?);
        Ok(())
    })?;
    Ok((pop, logbook))
}

/// Rank-1 members sorted by cost, keeping only entries that strictly improve
/// fidelity over every cheaper one (which also drops duplicate fitnesses).
pub fn pareto_front(pop: &[Individual]) -> Result<Vec<Individual>> {
    for (i, ind) in pop.iter().enumerate() {
        if ind.fitness.is_none() {
            return Err(Error::MissingFitness(i));
        }
    }
    let mut sorted: Vec<&Individual> = pop.iter().collect();
    sorted.sort_by(|a, b| {
        let (fa, fb) = (a.fit(), b.fit());
        fa.cost.cmp(&fb.cost).then(fb.fidelity.total_cmp(&fa.fidelity))
    });
    let mut front: Vec<Individual> = Vec::new();
    for ind in sorted {
        if front.last().is_none_or(|last| ind.fit().fidelity > last.fit().fidelity) {
            let mut member = ind.clone();
            member.rank = Some(1);
            front.push(member);
        }
    }
    Ok(front)
}
