#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Parsing never panics; an accepted config must build its objectives.
    if let Ok(config) = cilp::config::parse_config(text) {
        let _ = config.build_objectives();
        let _ = config.horizon();
    }
});
