#![no_main]

use evoprep::experiment::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = ExperimentConfig::from_toml_str(text) {
        assert!(config.state_count >= 1);
        assert_eq!(config.coupling_map().expect("validated").n_qubits(), config.n_qubits);
    }
});
