#![no_main]

use bmocz::dizet::{dizet_decode, ReceivedSequence};
use bmocz::huffman::ModulationParams;
use bmocz::Complex64;
use libfuzzer_sys::fuzz_target;

// First byte picks K; the rest is read as little-endian (re, im) f64 pairs.
fuzz_target!(|data: &[u8]| {
    let Some((&k, rest)) = data.split_first() else {
        return;
    };
    let samples: Vec<Complex64> = rest
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    let Ok(p) = ModulationParams::new(k as usize, 0.5) else {
        return;
    };
    let Ok(y) = ReceivedSequence::new(samples, p.k()) else {
        return;
    };
    let d = dizet_decode(&y, &p).unwrap();
    assert_eq!(d.bits.len(), p.k());
    assert!(d.bits.iter().all(|b| *b <= 1));
});
