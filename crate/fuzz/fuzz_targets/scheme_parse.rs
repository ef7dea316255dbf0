#![no_main]

use fdsc_core::experiment::Scheme;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(scheme) = s.parse::<Scheme>() {
        assert_eq!(scheme.to_string().parse::<Scheme>().unwrap(), scheme);
    }
});
