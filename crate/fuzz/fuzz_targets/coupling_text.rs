#![no_main]

use evoprep::CouplingMap;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(map) = text.parse::<CouplingMap>() else { return };
    let again: CouplingMap = map.to_text().parse().expect("printed map parses");
    assert_eq!(again, map);
    let (lo, hi) = map.lph_bounds();
    assert!(lo.is_finite() && lo <= hi);
});
