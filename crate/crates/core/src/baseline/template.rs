//! Fixed CX templates with free single-qubit rotations, fitted numerically.
//!
//! The template for n qubits carries exactly C_ub(n) CX gates in a layout
//! that splits the register into Schmidt halves: a small entangled core,
//! CX copies across the cut, then arbitrary unitaries on each half. Every
//! rotation angle is fitted by L-BFGS on the infidelity with an adjoint
//! gradient; deterministic restarts cover bad starting points.

use std::f64::consts::TAU;
use std::sync::Mutex;

use argmin::core::{CostFunction, Executor, Gradient};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::native::Op;
use crate::sim::StateVector;

const RESTARTS: u64 = 24;
const MAX_ITERS: u64 = 3000;
/// Infidelity at which a fit is accepted.
pub(crate) const FIT_TOLERANCE: f64 = 1e-12;

/// CX pairs of the template for `n` qubits, if one exists.
pub(crate) fn cx_template(n: usize) -> Option<Vec<(usize, usize)>> {
    let core4 = [(0, 1), (0, 2), (1, 3), (0, 1), (0, 1), (0, 1)];
    match n {
        1 => Some(vec![]),
        2 => Some(vec![(0, 1)]),
        3 => Some(vec![(0, 1), (1, 2), (1, 2)]),
        4 => {
            let mut t = core4.to_vec();
            t.extend([(2, 3); 3]);
            Some(t)
        }
        5 => {
            let mut t = core4.to_vec();
            t.extend([(2, 3), (3, 4), (2, 4)].iter().cycle().take(14));
            Some(t)
        }
        _ => None,
    }
}

#[derive(Clone, Copy)]
enum Axis {
    Y,
    Z,
}

#[derive(Clone, Copy)]
enum Step {
    Rot { qubit: usize, axis: Axis, param: usize },
    Cx(usize, usize),
}

struct Template {
    n: usize,
    steps: Vec<Step>,
    n_params: usize,
    target: Vec<Complex64>,
    best: Mutex<(f64, Vec<f64>)>,
}

impl Template {
    fn new(n: usize, cx: &[(usize, usize)], target: &StateVector) -> Self {
        let mut steps = Vec::new();
        let mut p = 0;
        let mut rot = |steps: &mut Vec<Step>, qubit, axis| {
            steps.push(Step::Rot { qubit, axis, param: p });
            p += 1;
        };
        for q in 0..n {
            rot(&mut steps, q, Axis::Y);
            rot(&mut steps, q, Axis::Z);
        }
        for &(c, t) in cx {
            steps.push(Step::Cx(c, t));
            for q in [c, t] {
                rot(&mut steps, q, Axis::Z);
                rot(&mut steps, q, Axis::Y);
                rot(&mut steps, q, Axis::Z);
            }
        }
        Self {
            n,
            steps,
            n_params: p,
            target: target.amplitudes().to_vec(),
            best: Mutex::new((f64::INFINITY, Vec::new())),
        }
    }

    fn forward(&self, params: &[f64]) -> Vec<Complex64> {
        let mut psi = vec![Complex64::new(0.0, 0.0); 1 << self.n];
        psi[0] = Complex64::new(1.0, 0.0);
        for s in &self.steps {
            apply(&mut psi, s, params, 1.0);
        }
        psi
    }

    fn overlap(&self, psi: &[Complex64]) -> Complex64 {
        self.target.iter().zip(psi).map(|(t, p)| t.conj() * p).sum()
    }

    fn record(&self, f: f64, params: &[f64]) {
        let mut best = self.best.lock().expect("not poisoned");
        if f < best.0 {
            *best = (f, params.to_vec());
        }
    }

    fn ops(&self, params: &[f64]) -> Vec<Op> {
        self.steps
            .iter()
            .map(|s| match *s {
                Step::Rot { qubit, axis: Axis::Y, param } => Op::Ry(qubit, params[param]),
                Step::Rot { qubit, axis: Axis::Z, param } => Op::Rz(qubit, params[param]),
                Step::Cx(c, t) => Op::Cx(c, t),
            })
            .collect()
    }
}

fn apply(psi: &mut [Complex64], step: &Step, params: &[f64], sign: f64) {
    match *step {
        Step::Cx(c, t) => {
            let (cb, tb) = (1 << c, 1 << t);
            for i in 0..psi.len() {
                if i & cb != 0 && i & tb == 0 {
                    psi.swap(i, i | tb);
                }
            }
        }
        Step::Rot { qubit, axis, param } => {
            let half = sign * params[param] / 2.0;
            let bit = 1 << qubit;
            match axis {
                Axis::Z => {
                    let (lo, hi) = (Complex64::from_polar(1.0, -half), Complex64::from_polar(1.0, half));
                    for (i, a) in psi.iter_mut().enumerate() {
                        *a *= if i & bit == 0 { lo } else { hi };
                    }
                }
                Axis::Y => {
                    let (s, c) = half.sin_cos();
                    for i in 0..psi.len() {
                        if i & bit == 0 {
                            let (a0, a1) = (psi[i], psi[i | bit]);
                            psi[i] = a0 * c - a1 * s;
                            psi[i | bit] = a0 * s + a1 * c;
                        }
                    }
                }
            }
        }
    }
}

/// ⟨λ|(−i/2)P|ψ⟩ for P = Y or Z on `qubit`.
fn generator_element(lambda: &[Complex64], psi: &[Complex64], qubit: usize, axis: Axis) -> Complex64 {
    let bit = 1 << qubit;
    let mut acc = Complex64::new(0.0, 0.0);
    match axis {
        Axis::Z => {
            for (i, (l, p)) in lambda.iter().zip(psi).enumerate() {
                let s = if i & bit == 0 { 1.0 } else { -1.0 };
                acc += l.conj() * p * s;
            }
        }
        Axis::Y => {
            // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩.
            for i in 0..psi.len() {
                if i & bit == 0 {
                    let j = i | bit;
                    acc += lambda[j].conj() * psi[i] * Complex64::i() - lambda[i].conj() * psi[j] * Complex64::i();
                }
            }
        }
    }
    acc * Complex64::new(0.0, -0.5)
}

impl CostFunction for Template {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, params: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        let psi = self.forward(params);
        let f = 1.0 - self.overlap(&psi).norm_sqr();
        self.record(f, params);
        Ok(f)
    }
}

impl Gradient for Template {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, params: &Vec<f64>) -> Result<Vec<f64>, argmin::core::Error> {
        let mut psi = self.forward(params);
        let o = self.overlap(&psi);
        self.record(1.0 - o.norm_sqr(), params);
        let mut lambda = self.target.clone();
        let mut grad = vec![0.0; self.n_params];
        for s in self.steps.iter().rev() {
            if let Step::Rot { qubit, axis, param } = *s {
                let d = generator_element(&lambda, &psi, qubit, axis);
                grad[param] = -2.0 * (o.conj() * d).re;
            }
            apply(&mut psi, s, params, -1.0);
            apply(&mut lambda, s, params, -1.0);
        }
        Ok(grad)
    }
}

/// Fits the template for `target.n_qubits()`. `None` if no template exists
/// or no restart reached [`FIT_TOLERANCE`].
pub(crate) fn template_ops(target: &StateVector) -> Option<Vec<Op>> {
    let n = target.n_qubits();
    let cx = cx_template(n)?;
    let problem = Template::new(n, &cx, target);
    let n_params = problem.n_params;
    let shared = std::sync::Arc::new(problem);
    for restart in 0..RESTARTS {
        let mut rng = ChaCha20Rng::seed_from_u64(0x7e3a_9b1c ^ restart);
        let init: Vec<f64> = (0..n_params).map(|_| rng.random_range(0.0..TAU)).collect();
        let solver = match LBFGS::new(MoreThuenteLineSearch::new(), 10).with_tolerance_cost(0.0) {
            Ok(s) => s,
            Err(_) => return None,
        };
        let run = Executor::new(ArcProblem(shared.clone()), solver)
            .configure(|state| state.param(init).max_iters(MAX_ITERS).target_cost(FIT_TOLERANCE / 10.0))
            .run();
        if let Err(e) = run {
            log::trace!("template restart {restart} stopped early: {e}");
        }
        let best = shared.best.lock().expect("not poisoned");
        if best.0 <= FIT_TOLERANCE {
            return Some(shared.ops(&best.1));
        }
    }
    None
}

struct ArcProblem(std::sync::Arc<Template>);

impl CostFunction for ArcProblem {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        self.0.cost(p)
    }
}

impl Gradient for ArcProblem {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, p: &Vec<f64>) -> Result<Vec<f64>, argmin::core::Error> {
        self.0.gradient(p)
    }
}
