#![no_main]

use dtp_core::independence::{decode_one_way_message, encode_one_way_message};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(msg) = decode_one_way_message(data) {
        assert_eq!(encode_one_way_message(&msg), data);
    }
});
