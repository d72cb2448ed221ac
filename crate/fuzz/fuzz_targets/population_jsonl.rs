#![no_main]

use evoprep::experiment::{parse_population_jsonl, population_to_jsonl, read_population_jsonl};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_population_jsonl(text);
    let Ok(pop) = read_population_jsonl(text) else { return };
    let printed = population_to_jsonl(&pop).expect("parsed records carry fitness");
    assert_eq!(read_population_jsonl(&printed).expect("printed population parses"), pop);
});
