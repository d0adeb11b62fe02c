#![no_main]

use libfuzzer_sys::fuzz_target;
use semiquant::harness::config::parse_config;
use semiquant::harness::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config(text) {
        let _ = RunConfig::from_file(&cfg);
    }
});
