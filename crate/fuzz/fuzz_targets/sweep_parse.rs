#![no_main]

use expctl::{Range, Sweep};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sweep) = text.parse::<Sweep>() {
        let points = sweep.points();
        assert!(!points.is_empty());
        assert!(points.iter().all(|x| *x >= sweep.range.from && *x <= sweep.range.to + sweep.range.step));
        assert_eq!(sweep.to_string().parse::<Sweep>().unwrap(), sweep);
    }
    if let Ok(range) = text.parse::<Range>() {
        assert_eq!(range.to_string().parse::<Range>().unwrap(), range);
    }
});
