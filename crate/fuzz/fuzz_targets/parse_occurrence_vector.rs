#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(x) = dtp_core::io::parse_occurrence_vector(&text) {
        let text = dtp_core::io::write_occurrence_vector(&x);
        assert_eq!(dtp_core::io::parse_occurrence_vector(&text).unwrap(), x);
    }
});
