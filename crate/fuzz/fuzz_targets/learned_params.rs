#![no_main]

use libfuzzer_sys::fuzz_target;
use lipstd_core::dataio::parse_learned_params;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_learned_params(text);
    }
});
