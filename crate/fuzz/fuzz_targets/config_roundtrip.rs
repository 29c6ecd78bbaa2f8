#![no_main]

use hypmass_cli::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(cfg) = RunConfig::parse(text) else { return };
    let again = RunConfig::parse(&cfg.to_json()).expect("serialised config parses");
    // NaN never gets through validation, so equality is meaningful
    assert_eq!(cfg, again);
});
