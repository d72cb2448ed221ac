use std::f64::consts::PI;

use evoprep::circuit::ViolationReason;
use evoprep::haar::{random_circuit, Domain, RngSeed};
use evoprep::{cnot_upper_bound, Circuit, CouplingMap, Error, Gate};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

mod common;

use common::{oracle_unitary, C};

fn unitary(c: &Circuit) -> DMatrix<C> {
    let dim = 1 << c.n_qubits();
    c.gates().iter().fold(DMatrix::identity(dim, dim), |u, g| oracle_unitary(g, c.n_qubits()) * u)
}

/// |tr(A†B)| / dim, which is one exactly when A = e^{iφ}B.
fn phase_overlap(a: &DMatrix<C>, b: &DMatrix<C>) -> f64 {
    (a.adjoint() * b).trace().norm() / a.nrows() as f64
}

/// Connected graph: a random spanning tree plus random extra edges.
fn random_map(n: usize, extra: usize, seed: u64) -> CouplingMap {
    let mut rng = RngSeed(seed).stream(Domain::Misc, 0);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.push((a, b));
        }
    }
    CouplingMap::new(n, edges).unwrap()
}

#[test]
fn cost_examples() {
    let c = Circuit::new(3, vec![Gate::x(0), Gate::cx(0, 1), Gate::sx(2), Gate::cx(1, 2), Gate::rz(0, 0.1)]).unwrap();
    assert_eq!((c.cost(), c.cnot_count()), (23, 2));
    assert_eq!(Circuit::empty(2).cost(), 0);
    let cx5 = Circuit::new(2, vec![Gate::cx(0, 1); 5]).unwrap();
    assert_eq!((cx5.cost(), cx5.cnot_count()), (50, 5));
}

#[test]
fn cascading_cancellation_matches_oracle() {
    let c = Circuit::new(2, vec![Gate::cx(0, 1), Gate::rz(1, PI), Gate::rz(1, PI), Gate::cx(0, 1)]).unwrap();
    let cleaned = c.clean();
    assert!(cleaned.is_empty());
    assert!((phase_overlap(&unitary(&c), &unitary(&cleaned)) - 1.0).abs() < 1e-12);
}

#[test]
fn validate_with_layout() {
    let falcon = CouplingMap::falcon_5t();
    let far = Circuit::new(5, vec![Gate::cx(0, 4)]).unwrap();
    let violations = far.validate(&falcon).unwrap_err();
    assert_eq!(violations.len(), 1);
    assert_eq!(violations[0].gate_index, Some(0));
    assert!(matches!(violations[0].reason, ViolationReason::NotAdjacent { .. }));
    let swapped = Circuit::with_layout(5, vec![Gate::cx(0, 4)], vec![0, 4, 2, 3, 1]).unwrap();
    assert!(swapped.validate(&falcon).is_ok());
}

#[test]
fn parse_errors_carry_line_numbers() {
    let err = "qubits 5\nlayout 0 1 2 3 4\ncx 0 7\n".parse::<Circuit>().unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    assert_eq!(Circuit::new(1, vec![Gate::rz(0, 1.5)]).unwrap().to_text(), "qubits 1\nlayout 0\nrz 0 1.5\n");
}

#[test]
fn upper_bound_is_monotone() {
    let values: Vec<u64> = (2..=24).map(|n| cnot_upper_bound(n).unwrap()).collect();
    assert_eq!(&values[..4], &[1, 3, 9, 20]);
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    assert!(cnot_upper_bound(1).is_err());
}

#[test]
fn clean_preserves_the_unitary_up_to_one_phase() {
    let mut rng = RngSeed(40).stream(Domain::Misc, 0);
    for _ in 0..300 {
        let n = rng.random_range(1..=3);
        let c = random_circuit(n, rng.random_range(0..=25), &CouplingMap::complete(n), &mut rng).unwrap();
        let mut gates = c.gates().to_vec();
        if let Some(&g) = gates.first() {
            gates.extend(g.inverse());
            gates.insert(0, g);
        }
        let c = c.with_gates(gates).unwrap();
        let cleaned = c.clean();
        assert!(cleaned.cost() <= c.cost());
        assert!(phase_overlap(&unitary(&c), &unitary(&cleaned)) >= 1.0 - 1e-10, "{c}");
        assert_eq!(cleaned.clean(), cleaned);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip_is_exact(seed in any::<u64>(), n in 1usize..=6, len in 0usize..=200) {
        let mut rng = RngSeed(seed).stream(Domain::Misc, 0);
        let mut layout: Vec<usize> = (0..n).collect();
        layout.shuffle(&mut rng);
        let c = random_circuit(n, len, &CouplingMap::complete(n), &mut rng).unwrap();
        let c = Circuit::with_layout(n, c.into_gates(), layout).unwrap();
        let back: Circuit = c.to_text().parse().unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn distance_is_isomorphism_invariant(seed in any::<u64>(), n in 2usize..=9, extra in 0usize..=12) {
        let map = random_map(n, extra, seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut RngSeed(seed).stream(Domain::Misc, 1));
        let relabeled = CouplingMap::new(n, map.edges().iter().map(|&(a, b)| (perm[a], perm[b]))).unwrap();
        prop_assert!((map.average_distance() - relabeled.average_distance()).abs() < 1e-12);
        let (lo, hi) = map.lph_bounds();
        prop_assert!(lo <= hi);
        prop_assert_eq!(lo == hi, map.is_complete());
    }
}

#[test]
fn complete_graphs_have_unit_distance() {
    for n in 2..=8 {
        assert_eq!(CouplingMap::complete(n).average_distance(), 1.0);
        assert_eq!(CouplingMap::complete(n).lph_bounds(), (1.0, 1.0));
    }
    let (lo, hi) = CouplingMap::line(10).lph_bounds();
    assert!((lo - 11.0 / 3.0).abs() < 1e-12 && (hi - 17.0).abs() < 1e-12);
}
