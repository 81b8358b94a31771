#![no_main]

use dtp_core::harness::Transcript;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(t) = Transcript::from_csv(&text) {
        assert_eq!(Transcript::from_csv(&t.to_csv()).unwrap().total_bits(), t.total_bits());
    }
});
