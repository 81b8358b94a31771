#![no_main]

use dtp_core::wire::{decode_multiset, encode_multiset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = decode_multiset(data) {
        assert_eq!(encode_multiset(&s), data);
    }
});
