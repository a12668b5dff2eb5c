#![no_main]

use libfuzzer_sys::fuzz_target;

// Exercises the key-value parser and the typed extractors layered on it.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(mut cfg) = opcost_cli::config::parse_config_str(text) {
            let _ = opcost_cli::config::problem_from_config(&mut cfg);
            let _ = opcost_cli::config::class_spec_from_config(&mut cfg);
        }
    }
});
