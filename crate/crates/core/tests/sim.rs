use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use evoprep::baseline::{exact_prepare, multiplexor_prepare, route};
use evoprep::haar::{random_circuit, sample_haar_state, Domain, RngSeed};
use evoprep::sim::{
    apply_circuit, apply_noisy, bell_state, fidelity_pure, fubini_study_distance, noisy_fidelity,
    predicted_noisy_fidelity, DensityMatrix,
};
use evoprep::{Circuit, CouplingMap, Gate, NoiseModel, StateVector};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::Rng;

mod common;

use common::{c, oracle_1q, oracle_unitary, overlap, to_vec};

fn eigenvalues(rho: &DensityMatrix) -> Vec<f64> {
    let d = rho.dim();
    let m = DMatrix::from_row_slice(d, d, rho.data());
    SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
}

#[test]
fn kronecker_oracle_agrees() {
    let mut rng = RngSeed(21).stream(Domain::Misc, 0);
    for _ in 0..500 {
        let n = rng.random_range(1..=4);
        let len = rng.random_range(0..=20);
        let circ = random_circuit(n, len, &CouplingMap::complete(n), &mut rng).unwrap();
        let input = sample_haar_state(n, &mut rng).unwrap();
        let mut u = DMatrix::identity(1 << n, 1 << n);
        for g in circ.gates() {
            u = oracle_unitary(g, n) * u;
        }
        let expect = &u * to_vec(&input);
        let got = to_vec(&apply_circuit(&circ, &input).unwrap());
        assert!(overlap(&expect, &got) >= 1.0 - 1e-10, "{circ}");
    }
}

#[test]
fn spec_examples() {
    let zero = StateVector::zero(2);
    assert_eq!(apply_circuit(&Circuit::empty(2), &zero).unwrap(), zero);
    let sxsx = Circuit::new(1, vec![Gate::sx(0), Gate::sx(0)]).unwrap();
    let one = apply_circuit(&sxsx, &StateVector::zero(1)).unwrap();
    assert!((fidelity_pure(&one, &StateVector::basis(1, 1)).unwrap() - 1.0).abs() < 1e-12);
    let bell = Circuit::new(2, vec![Gate::rz(0, FRAC_PI_2), Gate::sx(0), Gate::rz(0, FRAC_PI_2), Gate::cx(0, 1)]).unwrap();
    let out = apply_circuit(&bell, &zero).unwrap();
    assert!((fidelity_pure(&out, &bell_state()).unwrap() - 1.0).abs() < 1e-12);
    // RZ(π/2)·SX·RZ(π/2) is a Hadamard up to phase.
    let h = oracle_1q(&Gate::rz(0, FRAC_PI_2)) * oracle_1q(&Gate::sx(0)) * oracle_1q(&Gate::rz(0, FRAC_PI_2));
    let had = DMatrix::from_row_slice(2, 2, &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]);
    assert!(((had.adjoint() * h).trace().norm() / 2.0 - 1.0).abs() < 1e-12);

    assert_eq!(fidelity_pure(&StateVector::basis(2, 1), &StateVector::basis(2, 2)).unwrap(), 0.0);
    assert!((fubini_study_distance(&StateVector::basis(2, 1), &StateVector::basis(2, 2)).unwrap() - FRAC_PI_2).abs() < 1e-12);
    let half = StateVector::from_amplitudes(vec![c(0.5, 0.0), c(0.75f64.sqrt(), 0.0)]).unwrap();
    assert!((fubini_study_distance(&half, &StateVector::zero(1)).unwrap() - PI / 3.0).abs() < 1e-12);

    assert_eq!(predicted_noisy_fidelity(1.0, 0, 0.3), 1.0);
    assert!((predicted_noisy_fidelity(1.0, 67, 0.01) - 0.5100).abs() < 1e-4);
    assert_eq!(predicted_noisy_fidelity(0.5, 10, 0.0), 0.5);
}

#[test]
fn haar_overlap_mean() {
    let mut rng = RngSeed(22).stream(Domain::Misc, 0);
    let samples = 10_000;
    let values: Vec<f64> = (0..samples)
        .map(|_| {
            let a = sample_haar_state(5, &mut rng).unwrap();
            let b = sample_haar_state(5, &mut rng).unwrap();
            fidelity_pure(&a, &b).unwrap()
        })
        .collect();
    let mean = values.iter().sum::<f64>() / samples as f64;
    // Overlap is Beta(1, 31): variance 31 / (32² · 33).
    let sigma = (31.0 / (32.0f64.powi(2) * 33.0) / samples as f64).sqrt();
    assert!((mean - 1.0 / 32.0).abs() < 4.0 * sigma, "{mean}");
}

#[test]
fn norm_preserved_over_long_circuits() {
    let mut rng = RngSeed(23).stream(Domain::Misc, 0);
    let m = CouplingMap::falcon_5t();
    let circ = random_circuit(5, 10_000, &m, &mut rng).unwrap();
    let out = apply_circuit(&circ, &sample_haar_state(5, &mut rng).unwrap()).unwrap();
    assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
}

#[test]
fn cx_decay_matches_two_qubit_oracle() {
    let p = 0.05;
    for n in [2, 3] {
        for l in [0usize, 1, 5, 20] {
            let circ = Circuit::new(n, vec![Gate::cx(0, 1); l]).unwrap();
            let f = noisy_fidelity(&circ, &StateVector::zero(n), &NoiseModel::new(0.0, p).unwrap()).unwrap();
            // ρ → (1−p)ρ + p·I/4 on the pair, iterated l times from |00⟩.
            let mut oracle = 1.0;
            for _ in 0..l {
                oracle = (1.0 - p) * oracle + p / 4.0;
            }
            assert!((f - oracle).abs() < 1e-12, "n={n} l={l}: {f} vs {oracle}");
        }
    }
}

#[test]
fn noisy_basics() {
    let rho = apply_noisy(&Circuit::empty(3), &NoiseModel::default()).unwrap();
    assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-12);
    let x = Circuit::new(2, vec![Gate::x(0)]).unwrap();
    let rho = apply_noisy(&x, &NoiseModel::new(0.0, 0.1).unwrap()).unwrap();
    assert!((rho.get(1, 1).re - 1.0).abs() < 1e-12);
    assert_eq!(noisy_fidelity(&Circuit::empty(2), &StateVector::zero(2), &NoiseModel::default()).unwrap(), 1.0);
}

#[test]
fn long_exact_circuits_lose_to_short_ones_under_noise() {
    let m = CouplingMap::falcon_5t();
    let noise = NoiseModel::default();
    let target = sample_haar_state(5, &mut RngSeed(24).stream(Domain::Targets, 0)).unwrap();
    let long = route(&multiplexor_prepare(&target).unwrap(), &m).unwrap();
    let short = exact_prepare(&target, &m).unwrap();
    assert!(long.cnot_count() >= 100, "{}", long.cnot_count());
    assert!(short.cnot_count() < long.cnot_count() / 2);
    assert!(noisy_fidelity(&long, &target, &noise).unwrap() < noisy_fidelity(&short, &target, &noise).unwrap());
}

fn small_circuit() -> impl Strategy<Value = (Circuit, u64)> {
    (1usize..=4, 0usize..=30, any::<u64>()).prop_map(|(n, len, seed)| {
        let mut rng = RngSeed(seed).stream(Domain::Misc, 1);
        (random_circuit(n, len, &CouplingMap::complete(n), &mut rng).unwrap(), seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn density_is_a_valid_state((circ, _) in small_circuit(), p1 in 0.0f64..0.2, p2 in 0.0f64..0.5) {
        let rho = apply_noisy(&circ, &NoiseModel::new(p1, p2).unwrap()).unwrap();
        prop_assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-9);
        prop_assert!(rho.hermiticity_error() < 1e-10);
        prop_assert!(eigenvalues(&rho).iter().all(|&l| l >= -1e-9));
    }

    #[test]
    fn noiseless_density_is_the_pure_output((circ, _) in small_circuit()) {
        let n = circ.n_qubits();
        let rho = apply_noisy(&circ, &NoiseModel::noiseless()).unwrap();
        let psi = to_vec(&apply_circuit(&circ, &StateVector::zero(n)).unwrap());
        let d = 1 << n;
        let diff = DMatrix::from_row_slice(d, d, rho.data()) - &psi * psi.adjoint();
        let trace_distance: f64 = SymmetricEigen::new(diff).eigenvalues.iter().map(|l| l.abs()).sum::<f64>() / 2.0;
        prop_assert!(trace_distance < 1e-9);
        let pure = apply_circuit(&circ, &StateVector::zero(n)).unwrap();
        let f = noisy_fidelity(&circ, &pure, &NoiseModel::noiseless()).unwrap();
        prop_assert!((f - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fubini_study_triangle(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = RngSeed(seed).stream(Domain::Misc, 2);
        let a = sample_haar_state(n, &mut rng).unwrap();
        let b = sample_haar_state(n, &mut rng).unwrap();
        let x = sample_haar_state(n, &mut rng).unwrap();
        let d = |u: &StateVector, v: &StateVector| fubini_study_distance(u, v).unwrap();
        prop_assert!(d(&a, &b) <= d(&a, &x) + d(&x, &b) + 1e-9);
    }

    #[test]
    fn norm_is_preserved((circ, seed) in small_circuit()) {
        let mut rng = RngSeed(seed).stream(Domain::Misc, 3);
        let s = sample_haar_state(circ.n_qubits(), &mut rng).unwrap();
        prop_assert!((apply_circuit(&circ, &s).unwrap().norm_sqr() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn noisy_fidelity_nonincreasing_in_p2() {
    let mut rng = RngSeed(25).stream(Domain::Misc, 0);
    let levels = [0.0, 0.005, 0.01, 0.05, 0.2];
    for _ in 0..50 {
        let n = rng.random_range(2..=4);
        let circ = random_circuit(n, rng.random_range(1..25), &CouplingMap::line(n), &mut rng).unwrap();
        let target = apply_circuit(&circ, &StateVector::zero(n)).unwrap();
        let f: Vec<f64> = levels
            .iter()
            .map(|&p| noisy_fidelity(&circ, &target, &NoiseModel::new(0.001, p).unwrap()).unwrap())
            .collect();
        assert!(f.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{f:?}");
    }
}
