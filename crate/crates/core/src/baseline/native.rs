use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::circuit::{Angle, Gate};
use crate::error::{Error, Result};
use crate::sim::Matrix2;

const SMALL: f64 = 1e-12;

pub(crate) fn mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub(crate) fn identity() -> Matrix2 {
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    [[o, z], [z, o]]
}

pub(crate) fn ry(theta: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[Complex64::new(c, 0.0), Complex64::new(-s, 0.0)], [Complex64::new(s, 0.0), Complex64::new(c, 0.0)]]
}

pub(crate) fn rz(theta: f64) -> Matrix2 {
    let z = Complex64::new(0.0, 0.0);
    [[Complex64::from_polar(1.0, -theta / 2.0), z], [z, Complex64::from_polar(1.0, theta / 2.0)]]
}

/// Largest entry of |U†U − I|.
pub fn unitarity_error(u: &Matrix2) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let dot = u[0][i].conj() * u[0][j] + u[1][i].conj() * u[1][j];
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - expect).norm());
        }
    }
    worst
}

/// Native gates on `qubit` whose product equals `u` up to global phase.
///
/// Writes U ∝ RZ(φ)·RY(θ)·RZ(λ) and emits RZ(λ), SX, RZ(θ+π), SX, RZ(φ+π)
/// in time order. Diagonal, anti-diagonal and θ = π/2 inputs get shorter
/// sequences.
pub fn su2_to_native(u: &Matrix2, qubit: usize) -> Result<Vec<Gate>> {
    let err = unitarity_error(u);
    if !(err <= 1e-10) {
        return Err(Error::NotUnitary(err));
    }
    let (c, s) = (u[0][0].norm(), u[1][0].norm());
    let theta = 2.0 * s.atan2(c);
    let mut out = Vec::with_capacity(5);
    let push_rz = |out: &mut Vec<Gate>, angle: f64| {
        if !Angle::new(angle).is_zero() {
            out.push(Gate::rz(qubit, angle));
        }
    };
    if c < SMALL {
        out.push(Gate::x(qubit));
        push_rz(&mut out, u[1][0].arg() - u[0][1].arg());
        return Ok(out);
    }
    // In SU(2), U = [[a, −b̄], [b, ā]] with a = e^{−i(φ+λ)/2}·cos(θ/2) and
    // b = e^{i(φ−λ)/2}·sin(θ/2).
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let scale = det.sqrt().inv();
    let (a, b) = ((u[0][0] * scale).arg(), (u[1][0] * scale).arg());
    if s < SMALL {
        push_rz(&mut out, -2.0 * a);
        return Ok(out);
    }
    let phi = b - a;
    let lambda = -a - b;
    if (theta - FRAC_PI_2).abs() < SMALL {
        push_rz(&mut out, lambda - FRAC_PI_2);
        out.push(Gate::sx(qubit));
        push_rz(&mut out, phi + FRAC_PI_2);
    } else {
        push_rz(&mut out, lambda);
        out.push(Gate::sx(qubit));
        push_rz(&mut out, theta + PI);
        out.push(Gate::sx(qubit));
        push_rz(&mut out, phi + PI);
    }
    Ok(out)
}

/// Abstract operation used while building preparation circuits.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Op {
    Ry(usize, f64),
    Rz(usize, f64),
    Cx(usize, usize),
}

/// Fuses runs of rotations on each wire and emits native gates.
pub(crate) fn lower(n: usize, ops: &[Op]) -> Vec<Gate> {
    let mut pending: Vec<Option<Matrix2>> = vec![None; n];
    let mut out = Vec::new();
    let flush = |pending: &mut Vec<Option<Matrix2>>, q: usize, out: &mut Vec<Gate>| {
        if let Some(m) = pending[q].take() {
            out.extend(su2_to_native(&m, q).expect("products of rotations are unitary"));
        }
    };
    for op in ops {
        match *op {
            Op::Ry(q, a) | Op::Rz(q, a) => {
                let r = if matches!(op, Op::Ry(..)) { ry(a) } else { rz(a) };
                let acc = pending[q].unwrap_or_else(identity);
                pending[q] = Some(mul(&r, &acc));
            }
            Op::Cx(c, t) => {
                flush(&mut pending, c, &mut out);
                flush(&mut pending, t, &mut out);
                out.push(Gate::cx(c, t));
            }
        }
    }
    for q in 0..n {
        flush(&mut pending, q, &mut out);
    }
    out
}
