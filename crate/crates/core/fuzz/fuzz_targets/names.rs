#![no_main]

use icmaxent_core::io::parse_var;
use icmaxent_core::vars::{index_to_bitstring, parse_bitstring};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_var(text) {
        assert_eq!(parse_var(&v.to_string()), Ok(v));
    }
    if let Ok(bits) = parse_bitstring(text) {
        if bits.len() <= 20 {
            let index = bits.iter().enumerate().fold(0usize, |acc, (k, &b)| acc | (usize::from(b) << k));
            assert_eq!(index_to_bitstring(index, bits.len()), text);
        }
    }
});
