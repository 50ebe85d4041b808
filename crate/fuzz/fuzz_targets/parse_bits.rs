#![no_main]

use bmocz::io::{format_bits, parse_bits};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&k, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let k = k as usize;
    if let Ok(m) = parse_bits(text, k) {
        assert_eq!(m.len(), k);
        assert_eq!(parse_bits(&format_bits(&m), k).unwrap(), m);
    }
});
