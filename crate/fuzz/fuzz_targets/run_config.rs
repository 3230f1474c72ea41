#![no_main]

use gtsa_cli::config::{parse_config, parse_overrides};
use libfuzzer_sys::fuzz_target;

// Config text, then optional override arguments one per line after a NUL.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let (config, args) = text.split_once('\0').unwrap_or((text, ""));
    let args: Vec<String> = args.lines().map(str::to_owned).collect();
    let _ = parse_overrides(&args);
    if let Ok(cfg) = parse_config(config, &args) {
        let _ = cfg.validate();
        for m in cfg.compare.methods.iter().copied().chain([cfg.method]) {
            let _ = cfg.gtsa_config(m);
        }
    }
});
