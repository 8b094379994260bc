#![no_main]

use icmaxent_core::io::{graph_to_string, parse_graph};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(graph) = parse_graph(text) {
        let again = parse_graph(&graph_to_string(&graph)).expect("written graphs parse");
        assert_eq!(again.directed_edges(), graph.directed_edges());
        assert_eq!(again.confounders(), graph.confounders());
        assert_eq!(again.y_parents(), graph.y_parents());
    }
});
