#![no_main]

use libfuzzer_sys::fuzz_target;
use nwkernel::io::{format_weight_file, parse_weight_file};
use nwkernel::WeightOrigin;

fuzz_target!(|data: &[u8]| {
    let Some((&selector, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let mode = match selector % 3 {
        0 => None,
        1 => Some(WeightOrigin::Cost),
        _ => Some(WeightOrigin::Weight),
    };
    if let Ok(w) = parse_weight_file(text, mode) {
        let again = parse_weight_file(&format_weight_file(&w), None).expect("round trip");
        assert_eq!(again.supplied_rows(), w.supplied_rows());
        assert_eq!(again.origin(), w.origin());
    }
});
