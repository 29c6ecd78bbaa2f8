#![no_main]

use libfuzzer_sys::fuzz_target;

// Arbitrary bytes must give a config or an error, never a panic.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = hypmass_cli::RunConfig::parse(text) {
            assert!(cfg.validate().is_ok());
        }
    }
});
