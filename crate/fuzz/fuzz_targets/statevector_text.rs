#![no_main]

use evoprep::StateVector;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(state) = text.parse::<StateVector>() else { return };
    assert!((state.norm_sqr() - 1.0).abs() < 1e-9);
    let again: StateVector = state.to_text().parse().expect("printed state parses");
    assert_eq!(again.n_qubits(), state.n_qubits());
});
