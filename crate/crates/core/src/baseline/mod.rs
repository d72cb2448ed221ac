//! Exact state preparation, used to seed the genetic algorithm and as the
//! reference it is compared against.

mod multiplexor;
mod native;
mod route;
mod template;

pub use native::{su2_to_native, unitarity_error};
pub use route::route;

use crate::circuit::Circuit;
use crate::coupling::CouplingMap;
use crate::error::{Error, Result};
use crate::sim::{circuit_fidelity, StateVector, NORM_TOLERANCE};

pub const MAX_BASELINE_QUBITS: usize = 10;

/// Exact preparation via uniformly controlled rotations, on all-to-all
/// connectivity. Works for any width up to [`MAX_BASELINE_QUBITS`].
pub fn multiplexor_prepare(target: &StateVector) -> Result<Circuit> {
    check_target(target)?;
    let n = target.n_qubits();
    let ops = multiplexor::multiplexor_ops(target.amplitudes());
    Ok(Circuit::new(n, native::lower(n, &ops))?.clean())
}

/// Exact preparation with C_ub(n) CX gates from a fitted template, on
/// all-to-all connectivity. `None` above five qubits or if the fit fails.
pub fn template_prepare(target: &StateVector) -> Result<Option<Circuit>> {
    check_target(target)?;
    let n = target.n_qubits();
    let Some(ops) = template::template_ops(target) else {
        return Ok(None);
    };
    let c = Circuit::new(n, native::lower(n, &ops))?.clean();
    Ok((circuit_fidelity(&c, target)? >= 1.0 - 10.0 * template::FIT_TOLERANCE).then_some(c))
}

/// Exact preparation circuit for `target`, valid on `m`.
///
/// The multiplexor and template constructions are built for all-to-all
/// connectivity, routed onto `m` from every initial layout (up to
/// [`MAX_LAYOUT_SEARCH_QUBITS`] qubits) and cleaned; the result with the
/// fewest CX gates wins.
pub fn exact_prepare(target: &StateVector, m: &CouplingMap) -> Result<Circuit> {
    check_target(target)?;
    let n = target.n_qubits();
    if n != m.n_qubits() {
        return Err(Error::DimensionMismatch { expected: m.n_qubits(), found: n });
    }
    let mut candidates = vec![multiplexor_prepare(target)?];
    if template::cx_template(n).is_some() {
        match template_prepare(target)? {
            Some(c) => candidates.push(c),
            None => log::warn!("template fit failed; using the multiplexor construction"),
        }
    }
    let mut best: Option<Circuit> = None;
    for c in &candidates {
        let routed = route_best(c, m)?;
        if best.as_ref().is_none_or(|b| (routed.cnot_count(), routed.cost()) < (b.cnot_count(), b.cost())) {
            best = Some(routed);
        }
    }
    Ok(best.expect("at least one candidate"))
}

/// Widest register for which [`exact_prepare`] tries every initial layout.
pub const MAX_LAYOUT_SEARCH_QUBITS: usize = 6;

fn route_best(c: &Circuit, m: &CouplingMap) -> Result<Circuit> {
    let n = c.n_qubits();
    if m.is_complete() || n > MAX_LAYOUT_SEARCH_QUBITS {
        return Ok(route(c, m)?.clean());
    }
    let mut best: Option<Circuit> = None;
    for layout in permutations(n) {
        let placed = Circuit::with_layout(n, c.gates().to_vec(), layout)?;
        let routed = route(&placed, m)?.clean();
        let better = best.as_ref().is_none_or(|b| (routed.cnot_count(), routed.cost()) < (b.cnot_count(), b.cost()));
        if better {
            best = Some(routed);
        }
    }
    Ok(best.expect("at least one layout"))
}

/// All permutations of 0..n in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

fn check_target(target: &StateVector) -> Result<()> {
    if target.n_qubits() > MAX_BASELINE_QUBITS {
        return Err(Error::Domain(format!(
            "exact preparation supports at most {MAX_BASELINE_QUBITS} qubits, got {}",
            target.n_qubits()
        )));
    }
    let norm = target.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized(norm));
    }
    Ok(())
}
