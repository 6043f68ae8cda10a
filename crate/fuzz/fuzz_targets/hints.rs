#![no_main]

use libfuzzer_sys::fuzz_target;
use lipstd_core::dataio::Hints;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = Hints::from_json_str(text);
    }
});
