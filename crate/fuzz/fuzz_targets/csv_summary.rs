#![no_main]

use libfuzzer_sys::fuzz_target;
use sasaki_tg::expedition::{read_csv_summary, write_summary_rows};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_csv_summary(data) {
        let mut out = Vec::new();
        write_summary_rows(&rows, &mut out).unwrap();
        let _ = read_csv_summary(out.as_slice()).expect("written summaries read back");
    }
});
