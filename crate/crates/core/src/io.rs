//! Text formats: complex sequences as `re,im` CSV rows, bit strings, and
//! scenario / config JSON.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::huffman::BitMessage;
use crate::sim::{Scenario, SimConfig};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses one `re,im` pair per line. Blank lines and `#` comments are
/// skipped; a first non-comment line that does not parse as numbers is
/// taken as a header.
pub fn parse_sequence_csv(text: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    let mut seen_row = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = i + 1;
        let mut fields = line.split(',').map(str::trim);
        let (re, im) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(parse_err(lineno, "expected two comma-separated fields")),
        };
        match (re.parse::<f64>(), im.parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                if !a.is_finite() || !b.is_finite() {
                    return Err(parse_err(lineno, "non-finite sample"));
                }
                out.push(Complex64::new(a, b));
            }
            _ if !seen_row => {}
            _ => return Err(parse_err(lineno, format!("bad number in {line:?}"))),
        }
        seen_row = true;
    }
    Ok(out)
}

/// Writes `re,im` rows with a `re,im` header. Round-trips exactly through
/// [`parse_sequence_csv`].
pub fn format_sequence_csv(samples: &[Complex64]) -> String {
    let mut out = String::from("re,im\n");
    for s in samples {
        out.push_str(&format!("{:?},{:?}\n", s.re, s.im));
    }
    out
}

/// Parses a bit string of length `k`: `0b…` or plain binary (exactly `k`
/// digits, `_` separators allowed) or `0x…` hex, whose value must fit in
/// `k` bits and is read MSB first.
pub fn parse_bits(s: &str, k: usize) -> Result<BitMessage> {
    let s: String = s.trim().chars().filter(|c| *c != '_').collect();
    if k == 0 {
        return Err(parse_err(1, "K must be at least 1"));
    }
    if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        if hex.is_empty() {
            return Err(parse_err(1, "empty hex string"));
        }
        let mut bits = Vec::with_capacity(4 * hex.len());
        for c in hex.chars() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| parse_err(1, format!("bad hex digit {c:?}")))?;
            bits.extend((0..4).rev().map(|b| ((v >> b) & 1) as u8));
        }
        if bits.len() < k {
            let mut padded = vec![0u8; k - bits.len()];
            padded.extend(bits);
            bits = padded;
        }
        let extra = bits.len() - k;
        if bits[..extra].iter().any(|b| *b != 0) {
            return Err(parse_err(1, format!("hex value does not fit in {k} bits")));
        }
        return BitMessage::new(bits[extra..].to_vec());
    }
    let bin = s
        .strip_prefix("0b")
        .or_else(|| s.strip_prefix("0B"))
        .unwrap_or(&s);
    if bin.len() != k {
        return Err(parse_err(
            1,
            format!("expected {k} bits, got {}", bin.len()),
        ));
    }
    let bits = bin
        .chars()
        .map(|c| match c {
            '0' => Ok(0u8),
            '1' => Ok(1u8),
            _ => Err(parse_err(1, format!("bad bit {c:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    BitMessage::new(bits)
}

/// Plain binary, `m_1` first.
pub fn format_bits(m: &BitMessage) -> String {
    m.to_string()
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let s: Scenario = serde_json::from_str(text)?;
    s.validate()?;
    Ok(s)
}

pub fn parse_sim_config(text: &str) -> Result<SimConfig> {
    SimConfig::from_json(text)
}
