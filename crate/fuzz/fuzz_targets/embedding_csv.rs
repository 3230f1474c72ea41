#![no_main]

use gtsa_core::embedding::parse_embedding_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_embedding_csv(data);
});
