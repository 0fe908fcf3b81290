#![no_main]

use imgmine::manifest::Manifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = Manifest::parse(data, Default::default()) {
        let again = Manifest::parse(m.to_csv().as_bytes(), Default::default()).expect("written manifest parses");
        assert_eq!(again.entries, m.entries);
    }
});
