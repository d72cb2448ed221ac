use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Geometric, Normal};

use super::GAConfig;
use crate::circuit::{invert_permutation, Circuit, Gate};
use crate::coupling::CouplingMap;
use crate::haar::{random_cx, random_gate};

/// Lower bound on the circuit error used to scale continuous mutations.
pub const ERROR_FLOOR: f64 = 1e-3;

/// The thirteen variation operators, drawn with equal probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operator {
    DiscreteMutation,
    ContinuousMutation,
    MoveGate,
    InsertMutateInvert,
    SequenceInsertion,
    SequenceAndInverseInsertion,
    SequenceDeletion,
    SequenceReplacement,
    SequenceSwap,
    SequenceScramble,
    Crossover,
    Permutation,
    Clean,
}

impl Operator {
    pub const ALL: [Operator; 13] = [
        Operator::DiscreteMutation,
        Operator::ContinuousMutation,
        Operator::MoveGate,
        Operator::InsertMutateInvert,
        Operator::SequenceInsertion,
        Operator::SequenceAndInverseInsertion,
        Operator::SequenceDeletion,
        Operator::SequenceReplacement,
        Operator::SequenceSwap,
        Operator::SequenceScramble,
        Operator::Crossover,
        Operator::Permutation,
        Operator::Clean,
    ];
}

/// Parameters every operator needs.
#[derive(Clone, Copy, Debug)]
pub struct OperatorContext<'a> {
    pub map: &'a CouplingMap,
    pub emc: f64,
    pub cmw: f64,
    pub esl: f64,
    pub max_len: usize,
}

impl<'a> OperatorContext<'a> {
    pub fn new(config: &GAConfig, map: &'a CouplingMap) -> Self {
        Self {
            map,
            emc: config.emc,
            cmw: config.cmw,
            esl: config.esl,
            max_len: config.max_len_for(map.n_qubits()),
        }
    }

    fn mutation_probability(&self, len: usize) -> f64 {
        if len == 0 {
            0.0
        } else {
            (self.emc / len as f64).min(1.0)
        }
    }

    /// 1 + Geometric(1/ESL), so the mean is ESL.
    pub fn sequence_length<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let p = (1.0 / self.esl).min(1.0);
        let extra = Geometric::new(p).expect("p in (0, 1]").sample(rng);
        1 + extra.min(u32::MAX as u64) as usize
    }

    fn random_sequence<R: Rng + ?Sized>(&self, inverse_layout: &[usize], rng: &mut R) -> Vec<Gate> {
        let len = self.sequence_length(rng);
        (0..len).map(|_| random_gate(self.map, inverse_layout, rng)).collect()
    }

    fn finish(&self, n: usize, mut gates: Vec<Gate>, layout: Vec<usize>) -> Circuit {
        if gates.len() > self.max_len {
            log::debug!("truncating circuit from {} to {} gates", gates.len(), self.max_len);
            gates.truncate(self.max_len);
        }
        Circuit::from_parts(n, gates, layout)
    }
}

fn inverse_sequence(seq: &[Gate]) -> Vec<Gate> {
    seq.iter().rev().flat_map(|g| g.inverse()).collect()
}

/// Rewires one gate: a new random qubit for single-qubit gates, a new random
/// coupling edge for CX. Kind and angle are kept.
fn rewire<R: Rng + ?Sized>(g: &Gate, ctx: &OperatorContext, inverse_layout: &[usize], rng: &mut R) -> Gate {
    let n = ctx.map.n_qubits();
    match *g {
        Gate::Rz { theta, .. } => Gate::Rz { qubit: rng.random_range(0..n), theta },
        Gate::X { .. } => Gate::x(rng.random_range(0..n)),
        Gate::Sx { .. } => Gate::sx(rng.random_range(0..n)),
        Gate::Cx { .. } => random_cx(ctx.map, inverse_layout, rng).unwrap_or(*g),
    }
}

/// [`op1_discrete_uniform_mutation`] that also reports how many gates were
/// selected for rewiring.
pub fn discrete_mutation_counted<R: Rng + ?Sized>(
    c: &Circuit,
    ctx: &OperatorContext,
    rng: &mut R,
) -> (Circuit, usize) {
    let pm = ctx.mutation_probability(c.len());
    let inv = c.inverse_layout();
    let mut count = 0;
    let gates = c
        .gates()
        .iter()
        .map(|g| {
            if rng.random::<f64>() < pm {
                count += 1;
                rewire(g, ctx, &inv, rng)
            } else {
                *g
            }
        })
        .collect();
    (ctx.finish(c.n_qubits(), gates, c.layout().to_vec()), count)
}

/// Each gate is rewired with probability min(1, EMC/l).
pub fn op1_discrete_uniform_mutation<R: Rng + ?Sized>(c: &Circuit, ctx: &OperatorContext, rng: &mut R) -> Circuit {
    discrete_mutation_counted(c, ctx, rng).0
}

/// σ of the angle perturbation for a circuit with error `current_error`.
pub fn continuous_sigma(cmw: f64, current_error: f64) -> f64 {
    cmw / current_error.max(ERROR_FLOOR)
}

/// [`op2_continuous_uniform_mutation`] that also returns the perturbations
/// that were drawn.
pub fn continuous_mutation_traced<R: Rng + ?Sized>(
    c: &Circuit,
    current_error: f64,
    ctx: &OperatorContext,
    rng: &mut R,
) -> (Circuit, Vec<f64>) {
    let pm = ctx.mutation_probability(c.len());
    let normal = Normal::new(0.0, continuous_sigma(ctx.cmw, current_error)).expect("finite sigma");
    let mut deltas = Vec::new();
    let gates = c
        .gates()
        .iter()
        .map(|g| match *g {
            Gate::Rz { qubit, theta } if rng.random::<f64>() < pm => {
                let d = normal.sample(rng);
                deltas.push(d);
                Gate::rz(qubit, theta.radians() + d)
            }
            _ => *g,
        })
        .collect();
    (ctx.finish(c.n_qubits(), gates, c.layout().to_vec()), deltas)
}

/// Each RZ angle is shifted, with probability min(1, EMC/l), by a Gaussian
/// of width CMW/max(ε, 10⁻³), where ε = √(1 − F) is the parent's error.
pub fn op2_continuous_uniform_mutation<R: Rng + ?Sized>(
    c: &Circuit,
    current_error: f64,
    ctx: &OperatorContext,
    rng: &mut R,
) -> Circuit {
    continuous_mutation_traced(c, current_error, ctx, rng).0
}

pub fn op3_move_gate<R: Rng + ?Sized>(c: &Circuit, ctx: &OperatorContext, rng: &mut R) -> Circuit {
    let mut gates = c.gates().to_vec();
    if gates.len() > 1 {
        let g = gates.remove(rng.random_range(0..gates.len()));
        let at = rng.random_range(0..=gates.len());
        gates.insert(at, g);
    }
    ctx.finish(c.n_qubits(), gates, c.layout().to_vec())
}

/// Rewires one random gate and wraps it as g, gate, g†.
pub fn op4_insert_mutate_invert<R: Rng + ?Sized>(c: &Circuit, ctx: &OperatorContext, rng: &mut R) -> Circuit {
    if c.is_empty() {
        return c.clone();
    }
    let inv = c.inverse_layout();
    let i = rng.random_range(0..c.len());
    let middle = rewire(&c.gates()[i], ctx, &inv, rng);
    let wrap = random_gate(ctx.map, &inv, rng);
    let mut gates = Vec::with_capacity(c.len() + 4);
    gates.extend_from_slice(&c.gates()[..i]);
    gates.push(wrap);
    gates.push(middle);
    gates.extend(wrap.inverse());
    gates.extend_from_slice(&c.gates()[i + 1..]);
    ctx.finish(c.n_qubits(), gates, c.layout().to_vec())
}

pub fn op5_sequence_insertion<R: Rng + ?Sized>(c: &Circuit, ctx: &OperatorContext, rng: &mut R) -> Circuit {
    let seq = ctx.random_sequence(&c.inverse_layout(), rng);
    let at = rng.random_range(0..=c.len());
    let mut gates = c.gates().to_vec();
    gates.splice(at..at, seq);
    ctx.finish(c.n_qubits(), gates, c.layout().to_vec())
}

/// Inserts a random sequence S at i and S† at a later point j ≥ i.
pub fn op6_sequence_and_inverse_insertion<R: Rng + ?Sized>(
    c: &Circuit,
    ctx: &OperatorContext,
    rng: &mut R,
) -> Circuit {
    let i = rng.random_range(0..=c.len());
    let j = rng.random_range(i..=c.len());
    sequence_and_inverse_at(c, ctx, i, j, rng)
}

pub(crate) fn sequence_and_inverse_at<R: Rng + ?Sized>(
    c: &Circuit,
    ctx: &OperatorContext,
    i: usize,
    j: usize,
    rng: &mut R,
) -> Circuit {
    let seq = ctx.random_sequence(&c.inverse_layout(), rng);
    let g = c.gates();
    let mut gates = Vec::with_capacity(g.len() + 4 * seq.len());
    gates.extend_from_slice(&g[..i]);
    gates.extend_from_slice(&seq);
    gates.extend_from_slice(&g[i..j]);
    gates.extend(inverse_sequence(&seq));
    gates.extend_from_slice(&g[j..]);
    ctx.finish(c.n_qubits(), gates, c.layout().to_vec())
}

pub fn op7_sequence_deletion<R: Rng + ?Sized>(c: &Circuit, ctx: &OperatorContext, rng: &mut R) -> Circuit {
    if c.is_empty() {
        return c.clone();
    }
    let len = ctx.sequence_length(rng);
    let start = rng.random_range(0..c.len());
    let end = (start + len).min(c.len());
    let mut gates = c.gates().to_vec();
    gates.drain(start..end);
    ctx.finish(c.n_qubits(), gates, c.layout().to_vec())
}

pub fn op8_sequence_replacement<R: Rng + ?Sized>(c: &Circuit, ctx: &OperatorContext, rng: &mut R) -> Circuit {
    let shorter = op7_sequence_deletion(c, ctx, rng);
    op5_sequence_insertion(&shorter, ctx, rng)
}

/// Exchanges two non-overlapping intervals.
pub fn op9_sequence_swap<R: Rng + ?Sized>(c: &Circuit, ctx: &OperatorContext, rng: &mut R) -> Circuit {
    let n = c.len();
    if n < 2 {
        return c.clone();
    }
    let l1 = ctx.sequence_length(rng).min(n - 1);
    let l2 = ctx.sequence_length(rng).min(n - l1);
    let slack = n - l1 - l2;
    let a = rng.random_range(0..=slack);
    let gap = rng.random_range(0..=slack - a);
    let b = a + l1 + gap;
    let g = c.gates();
    let mut gates = Vec::with_capacity(n);
    gates.extend_from_slice(&g[..a]);
    gates.extend_from_slice(&g[b..b + l2]);
    gates.extend_from_slice(&g[a + l1..b]);
    gates.extend_from_slice(&g[a..a + l1]);
    gates.extend_from_slice(&g[b + l2..]);
    ctx.finish(c.n_qubits(), gates, c.layout().to_vec())
}

/// Shuffles one interval.
pub fn op10_sequence_scramble<R: Rng + ?Sized>(c: &Circuit, ctx: &OperatorContext, rng: &mut R) -> Circuit {
    if c.len() < 2 {
        return c.clone();
    }
    let len = ctx.sequence_length(rng).min(c.len());
    let start = rng.random_range(0..=c.len() - len);
    let mut gates = c.gates().to_vec();
    gates[start..start + len].shuffle(rng);
    ctx.finish(c.n_qubits(), gates, c.layout().to_vec())
}

/// One-point crossover at k, uniform on 0..=len(a).
///
/// Each child keeps the layout of the parent supplying its head (or its
/// tail when the head is empty); CX gates made illegal by that layout are
/// rewired to random edges.
pub fn op11_crossover<R: Rng + ?Sized>(
    a: &Circuit,
    b: &Circuit,
    ctx: &OperatorContext,
    rng: &mut R,
) -> (Circuit, Circuit) {
    let k = rng.random_range(0..=a.len());
    crossover_at(a, b, k, ctx, rng)
}

pub(crate) fn crossover_at<R: Rng + ?Sized>(
    a: &Circuit,
    b: &Circuit,
    k: usize,
    ctx: &OperatorContext,
    rng: &mut R,
) -> (Circuit, Circuit) {
    let (ka, kb) = (k.min(a.len()), k.min(b.len()));
    let child = |head: &Circuit, kh: usize, tail: &Circuit, kt: usize, rng: &mut R| {
        let mut gates = head.gates()[..kh].to_vec();
        gates.extend_from_slice(&tail.gates()[kt..]);
        let layout = if kh == 0 { tail.layout() } else { head.layout() }.to_vec();
        let gates = repair(gates, &layout, ctx, rng);
        ctx.finish(a.n_qubits(), gates, layout)
    };
    let c1 = child(a, ka, b, kb, rng);
    let c2 = child(b, kb, a, ka, rng);
    (c1, c2)
}

/// Replaces every CX that is illegal under `layout` by a random legal one.
fn repair<R: Rng + ?Sized>(gates: Vec<Gate>, layout: &[usize], ctx: &OperatorContext, rng: &mut R) -> Vec<Gate> {
    let inv = invert_permutation(layout);
    gates
        .into_iter()
        .map(|g| match g {
            Gate::Cx { control, target } if !ctx.map.is_adjacent(layout[control], layout[target]) => {
                random_cx(ctx.map, &inv, rng).expect("a CX exists, so the map has edges")
            }
            _ => g,
        })
        .collect()
}

/// Swaps the physical positions of two distinct logical qubits and repairs
/// any CX this makes illegal.
pub fn op12_permutation_mutation<R: Rng + ?Sized>(c: &Circuit, ctx: &OperatorContext, rng: &mut R) -> Circuit {
    let n = c.n_qubits();
    if n < 2 {
        return c.clone();
    }
    let i = rng.random_range(0..n);
    let j = (i + rng.random_range(1..n)) % n;
    permute_with(c, i, j, ctx, rng)
}

pub(crate) fn permute_with<R: Rng + ?Sized>(
    c: &Circuit,
    i: usize,
    j: usize,
    ctx: &OperatorContext,
    rng: &mut R,
) -> Circuit {
    let mut layout = c.layout().to_vec();
    layout.swap(i, j);
    let gates = repair(c.gates().to_vec(), &layout, ctx, rng);
    ctx.finish(c.n_qubits(), gates, layout)
}

pub fn op13_clean(c: &Circuit) -> Circuit {
    c.clean()
}
