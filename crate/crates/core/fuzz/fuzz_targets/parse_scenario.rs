#![no_main]

use choi_moments::scenario::{parse_scenario, render_scenario};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = parse_scenario(text) {
            // anything accepted must survive a render/parse cycle unchanged
            let again = parse_scenario(&render_scenario(&config)).expect("rendered config rejected");
            assert_eq!(again, config);
        }
    }
});
