#![no_main]

use icmaxent_core::io::{joint_to_string, parse_joint};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_joint(text) {
        assert_eq!(parse_joint(&joint_to_string(&p)).expect("written tables parse"), p);
    }
});
