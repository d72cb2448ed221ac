#![no_main]

use evoprep::Circuit;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(circuit) = text.parse::<Circuit>() else { return };
    let again: Circuit = circuit.to_text().parse().expect("printed circuit parses");
    assert_eq!(again, circuit);
    if circuit.n_qubits() <= 6 && circuit.len() <= 256 {
        let cleaned = circuit.clean();
        assert!(cleaned.cost() <= circuit.cost());
    }
});
