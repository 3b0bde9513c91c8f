#![no_main]

use expctl::config::{parse, render};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = parse(text) {
        let canonical = render(&spec);
        let again = parse(&canonical).expect("canonical text parses");
        assert_eq!(again, spec);
    }
});
