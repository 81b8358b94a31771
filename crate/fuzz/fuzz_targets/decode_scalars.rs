#![no_main]

use dtp_core::wire;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = wire::decode_f64(data);
    let _ = wire::decode_u64(data);
    if let Ok(d) = wire::decode_decision(data) {
        assert_eq!(wire::encode_decision(d), data);
    }
});
