#![no_main]

use libfuzzer_sys::fuzz_target;
use sasaki_tg::expedition::{read_json, to_json_string};

fuzz_target!(|data: &[u8]| {
    if let Ok(report) = read_json(data) {
        let text = to_json_string(&report);
        let again = read_json(text.as_bytes()).expect("written reports read back");
        assert_eq!(to_json_string(&again), text);
    }
});
