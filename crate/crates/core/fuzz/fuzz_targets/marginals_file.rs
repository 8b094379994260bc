#![no_main]

use icmaxent_core::io::{marginals_to_string, parse_marginals};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_marginals(text) {
        assert_eq!(parse_marginals(&marginals_to_string(&m)).expect("written marginals parse"), m);
    }
});
