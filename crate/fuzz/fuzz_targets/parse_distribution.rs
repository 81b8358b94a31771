#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(p) = dtp_core::io::parse_distribution(&text) {
        let again = dtp_core::io::parse_distribution(&dtp_core::io::write_distribution(&p)).unwrap();
        assert_eq!(again, p);
    }
});
