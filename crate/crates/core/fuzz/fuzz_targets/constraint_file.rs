#![no_main]

use icmaxent_core::io::{constraints_to_string, parse_constraints};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(set) = parse_constraints(text) {
        let again = parse_constraints(&constraints_to_string(set.n_causes, &set.constraints))
            .expect("written constraints parse");
        assert_eq!(again, set);
    }
});
