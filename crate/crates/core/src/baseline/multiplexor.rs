//! Amplitude encoding with uniformly controlled rotations.
//!
//! Qubits are set from the most significant down. The RY stage fixes
//! magnitudes, the RZ stage fixes relative phases. Each uniformly controlled
//! rotation with k controls becomes 2^k rotations interleaved with 2^k CX
//! gates along a Gray code.

use num_complex::Complex64;

use super::native::Op;

const ZERO_WEIGHT: f64 = 1e-28;
const ZERO_ANGLE: f64 = 1e-14;

/// Emits the rotations of a multiplexor on `target` controlled by
/// `target+1 ..`, where `angles[y]` applies when the controls read `y`.
///
/// `reversed` emits the mirror image, which starts with the CX the
/// forward form ends with.
fn multiplexed(ops: &mut Vec<Op>, axis: fn(usize, f64) -> Op, target: usize, angles: &[f64], reversed: bool) {
    let k = angles.len().trailing_zeros() as usize;
    let size = angles.len();
    let theta: Vec<f64> = (0..size)
        .map(|i| {
            let g = i ^ (i >> 1);
            let s: f64 = angles
                .iter()
                .enumerate()
                .map(|(y, a)| if (y & g).count_ones() % 2 == 0 { *a } else { -*a })
                .sum();
            s / size as f64
        })
        .collect();
    if theta[1..].iter().all(|t| t.abs() < ZERO_ANGLE) {
        if theta[0].abs() >= ZERO_ANGLE {
            ops.push(axis(target, theta[0]));
        }
        return;
    }
    let control = |i: usize| {
        let bit = if i + 1 == size { k - 1 } else { (i + 1).trailing_zeros() as usize };
        target + 1 + bit
    };
    let mut steps: Vec<[Op; 2]> = (0..size).map(|i| [axis(target, theta[i]), Op::Cx(control(i), target)]).collect();
    if reversed {
        steps.reverse();
        for s in &mut steps {
            s.swap(0, 1);
        }
    }
    for [a, b] in steps {
        for op in [a, b] {
            match op {
                Op::Ry(_, t) | Op::Rz(_, t) if t.abs() < ZERO_ANGLE => {}
                _ => ops.push(op),
            }
        }
    }
}

/// Replaces undetermined entries by the first determined one, or zero.
fn fill_free(values: &mut [f64], determined: &[bool]) {
    let fill = values.iter().zip(determined).find(|(_, d)| **d).map(|(v, _)| *v).unwrap_or(0.0);
    for (v, d) in values.iter_mut().zip(determined) {
        if !d {
            *v = fill;
        }
    }
}

/// Rotation sequence taking |0…0⟩ to `amps` up to global phase.
pub(crate) fn multiplexor_ops(amps: &[Complex64]) -> Vec<Op> {
    let n = amps.len().trailing_zeros() as usize;
    let mut ops = Vec::new();

    // weights[level][y]: squared norm of the branch whose top bits read y.
    let mut weights: Vec<Vec<f64>> = vec![amps.iter().map(|a| a.norm_sqr()).collect()];
    for _ in 0..n {
        let w = weights.last().expect("non-empty");
        weights.push(w.chunks(2).map(|c| c[0] + c[1]).collect());
    }

    for q in (0..n).rev() {
        let below = &weights[q];
        let count = below.len() / 2;
        let mut angles = vec![0.0; count];
        let mut determined = vec![false; count];
        for y in 0..count {
            let (w0, w1) = (below[2 * y], below[2 * y + 1]);
            if w0 + w1 > ZERO_WEIGHT {
                angles[y] = 2.0 * w1.sqrt().atan2(w0.sqrt());
                determined[y] = true;
            }
        }
        fill_free(&mut angles, &determined);
        multiplexed(&mut ops, Op::Ry, q, &angles, false);
    }

    let mut phase: Vec<f64> = amps.iter().map(|a| a.arg()).collect();
    let mut live: Vec<bool> = amps.iter().map(|a| a.norm_sqr() > ZERO_WEIGHT).collect();
    for q in 0..n {
        let count = phase.len() / 2;
        let mut angles = vec![0.0; count];
        let mut determined = vec![false; count];
        for y in 0..count {
            if live[2 * y] && live[2 * y + 1] {
                angles[y] = phase[2 * y + 1] - phase[2 * y];
                determined[y] = true;
            }
        }
        fill_free(&mut angles, &determined);
        let mut parent = vec![0.0; count];
        let mut parent_live = vec![false; count];
        for y in 0..count {
            let half = angles[y] / 2.0;
            parent[y] = if live[2 * y] { phase[2 * y] + half } else { phase[2 * y + 1] - half };
            parent_live[y] = live[2 * y] || live[2 * y + 1];
        }
        multiplexed(&mut ops, Op::Rz, q, &angles, q == 0);
        phase = parent;
        live = parent_live;
    }
    ops
}
