#![no_main]

use bmocz::io::{format_sequence_csv, parse_sequence_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(samples) = parse_sequence_csv(text) {
        let again = parse_sequence_csv(&format_sequence_csv(&samples)).unwrap();
        assert_eq!(samples, again);
    }
});
