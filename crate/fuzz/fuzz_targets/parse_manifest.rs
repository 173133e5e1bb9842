#![no_main]

use libfuzzer_sys::fuzz_target;
use nwkernel_cli::manifest::{parse_manifest, to_json};

fuzz_target!(|text: &str| {
    if let Ok(m) = parse_manifest(text) {
        let again = parse_manifest(&to_json(&m)).expect("serialized manifest parses");
        assert_eq!(again, m);
    }
});
