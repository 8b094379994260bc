#![no_main]

use icmaxent_core::io::{dataset_to_string, parse_dataset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ds) = parse_dataset(text) {
        assert_eq!(parse_dataset(&dataset_to_string(&ds)).expect("written datasets parse"), ds);
    }
});
