#![no_main]

use libfuzzer_sys::fuzz_target;
use sasaki_tg::expedition::{parse_scenario, validate};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(config) = parse_scenario(src) {
        let _ = validate(&config, src);
        let _ = config.chart.build();
    }
});
