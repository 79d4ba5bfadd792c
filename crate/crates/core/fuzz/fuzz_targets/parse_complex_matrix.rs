#![no_main]
use choi_moments::scenario::parse_complex_matrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = parse_complex_matrix(text) {
            assert!(m.is_square());
        }
    }
});
