#![no_main]

use dtp_core::sketch::L2Sketch;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = L2Sketch::from_bytes(data) {
        assert_eq!(s.to_bytes(), data);
        let _ = s.estimate_norm_sq();
    }
});
