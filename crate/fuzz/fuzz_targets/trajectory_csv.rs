#![no_main]

use libfuzzer_sys::fuzz_target;
use sasaki_tg::expedition::{read_trajectory, write_trajectory};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_trajectory(data) {
        let mut out = Vec::new();
        write_trajectory(&rows, &mut out).unwrap();
        let _ = read_trajectory(out.as_slice()).expect("written trajectories read back");
    }
});
