#![no_main]

use libfuzzer_sys::fuzz_target;
use varobs::regression::Shots;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(Shots::Count(n)) = s.parse::<Shots>() {
            assert!(n > 0);
        }
    }
});
