#![no_main]

use bpe::config::ScanAxis;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(axis) = s.parse::<ScanAxis>() {
        assert_eq!(axis.name().parse::<ScanAxis>().ok(), Some(axis));
    }
});
