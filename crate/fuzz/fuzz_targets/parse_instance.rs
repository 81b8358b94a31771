//! Instance files written by `dtp hardgen`. Accepted input must survive a
//! write/parse round trip.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(file) = dtp_core::io::parse_instance(&text) {
        let again = dtp_core::io::parse_instance(&dtp_core::io::write_instance(&file)).unwrap();
        assert_eq!(again, file);
    }
});
