#![no_main]

use libfuzzer_sys::fuzz_target;
use nwkernel::io::parse_permutation;

fuzz_target!(|text: &str| {
    if let Ok(p) = parse_permutation(text) {
        let again = parse_permutation(&p.to_string()).expect("formatted permutation parses");
        assert_eq!(again, p);
        assert!(p.compose(&p.inverse()).expect("same length").is_identity());
    }
});
