#![no_main]

use d2d::checkers::{parse_placement, serialize_placement};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_placement(text) {
        assert_eq!(parse_placement(&serialize_placement(&p)).unwrap(), p);
    }
});
