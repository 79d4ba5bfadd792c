#![no_main]
use choi_moments::scenario::parse_knots;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_knots(text);
    }
});
