#![no_main]

use dtp_core::experiment::Constants;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let _ = Constants::from_toml(&text);
});
