#![no_main]

use fdsc_core::experiment::ExperimentSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(spec) = ExperimentSpec::from_toml_str(s) else { return };
    let text = spec.to_toml_string().expect("valid spec serializes");
    let back = ExperimentSpec::from_toml_str(&text).expect("serialized spec parses");
    // NaN parameters never compare equal; compare the serialized forms instead.
    assert_eq!(back.to_toml_string().unwrap(), text);
});
