#![no_main]

use fdsc_core::farey::Rational;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = s.parse::<Rational>() {
        // Parsed values are reduced, so display round-trips exactly.
        assert_eq!(r.to_string().parse::<Rational>().unwrap(), r);
    }
});
