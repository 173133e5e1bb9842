#![no_main]

use libfuzzer_sys::fuzz_target;
use nwkernel::io::parse_matrix_csv;
use nwkernel::psd::symmetric_eigen;

fuzz_target!(|text: &str| {
    if let Ok((n, values)) = parse_matrix_csv(text) {
        assert_eq!(values.len(), n * n);
        if n <= 12 {
            let _ = symmetric_eigen(&values, n);
        }
    }
});
