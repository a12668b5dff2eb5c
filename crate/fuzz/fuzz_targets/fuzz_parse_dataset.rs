#![no_main]

use libfuzzer_sys::fuzz_target;

// The labeled-table parser must never panic on arbitrary input; errors are
// the expected outcome for malformed text.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = opcost_cli::table::parse_dataset_str(text);
    }
});
