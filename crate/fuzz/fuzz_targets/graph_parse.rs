#![no_main]

use d2d::graph::{parse, serialize};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse(text) {
        let again = parse(&serialize(&g)).expect("serialized graph parses");
        assert_eq!(again, g);
    }
});
