#![no_main]

use libfuzzer_sys::fuzz_target;
use lipstd_core::dataio::ScalingMetadata;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(meta) = ScalingMetadata::from_json_str(text) {
        let again = ScalingMetadata::from_json_str(&meta.to_json_string()).expect("re-parse");
        assert_eq!(again.columns.len(), meta.columns.len());
    }
});
