#![no_main]

use gtsa_core::dataset::{parse_csv, LabelColumn};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_csv(data, None);
    let _ = parse_csv(data, Some(&LabelColumn::Name("label".into())));
    let _ = parse_csv(data, Some(&LabelColumn::Index(0)));
});
