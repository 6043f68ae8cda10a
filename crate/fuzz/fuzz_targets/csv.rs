#![no_main]

use libfuzzer_sys::fuzz_target;
use lipstd_core::dataio::read_csv_from;

// First byte picks the delimiter.
fuzz_target!(|data: &[u8]| {
    let Some((&sel, body)) = data.split_first() else { return };
    let delimiter = [b',', b';', b'\t', b'|'][sel as usize % 4];
    if let Ok(frame) = read_csv_from(body, None, delimiter) {
        for c in &frame.columns {
            assert_eq!(c.values.len(), frame.n_rows);
            assert_eq!(c.mask.len(), frame.n_rows);
        }
    }
});
