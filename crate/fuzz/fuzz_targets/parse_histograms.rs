#![no_main]

use libfuzzer_sys::fuzz_target;
use nwkernel::io::{parse_histogram, parse_histograms};

fuzz_target!(|text: &str| {
    let Ok(records) = parse_histograms(text) else {
        return;
    };
    assert_eq!(records.histograms.len(), records.lines.len());
    for h in &records.histograms {
        let again = parse_histogram(&h.to_string()).expect("formatted histogram parses");
        assert_eq!(&again, h);
    }
});
