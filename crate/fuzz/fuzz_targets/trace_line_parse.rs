#![no_main]

use d2d::engine::TraceEvent;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else { return };
    if let Ok(e) = TraceEvent::from_json_line(line) {
        assert_eq!(TraceEvent::from_json_line(&e.to_json_line()).unwrap(), e);
    }
});
