#![no_main]

use icmaxent_core::io::{model_to_string, parse_model};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = parse_model(text) {
        let written = model_to_string(&file.model, file.report.as_ref()).expect("parsed models are normalized");
        let again = parse_model(&written).expect("written models parse");
        assert_eq!(again.model.lambda(), file.model.lambda());
        assert_eq!(again.model.constraints(), file.model.constraints());
    }
});
