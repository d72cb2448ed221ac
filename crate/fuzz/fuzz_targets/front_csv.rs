#![no_main]

use evoprep::experiment::{front_rows_to_csv, parse_front_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(rows) = parse_front_csv(text) else { return };
    assert_eq!(parse_front_csv(&front_rows_to_csv(&rows)).expect("printed rows parse"), rows);
});
