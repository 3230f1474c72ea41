#![no_main]

use gtsa_core::embedding::parse_partition_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(p) = parse_partition_csv(data) {
        let _ = p.codes();
    }
});
