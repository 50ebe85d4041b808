//! DiZeT decoding: each bit is recovered by comparing the received
//! polynomial's magnitude at the two candidate zeros of its pair.
//!
//! The two test magnitudes are normalized by the Euclidean norm of the
//! evaluation weights, `c± = ‖(R^{±n})_{n<N}‖₂`, so both statistics see the
//! same noise variance under white noise.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::huffman::{polyval, BitMessage, ModulationParams};

/// Received samples `y_0..y_{N-1}` of one packet (`N = K + L`).
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSequence {
    samples: Vec<Complex64>,
    assumed_k: usize,
}

impl ReceivedSequence {
    pub fn new(samples: Vec<Complex64>, assumed_k: usize) -> Result<Self> {
        if samples.len() < assumed_k + 1 {
            return Err(Error::InsufficientLength {
                needed: assumed_k + 1,
                got: samples.len(),
            });
        }
        Ok(ReceivedSequence { samples, assumed_k })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn assumed_k(&self) -> usize {
        self.assumed_k
    }
}

/// Hard decisions plus per-bit log-ratio margins (`bit = 1` iff margin `> 0`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodedBits {
    pub bits: Vec<u8>,
    pub margins: Vec<f64>,
}

impl DecodedBits {
    pub fn message(&self) -> BitMessage {
        BitMessage::new(self.bits.clone()).expect("decoder emits 0/1 bits")
    }

    pub fn bit_errors(&self, sent: &BitMessage) -> usize {
        self.bits
            .iter()
            .zip(sent.bits())
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// `Y(z) = Σ y_n z^n` by Horner's rule.
pub fn eval_at_point(y: &[Complex64], z: Complex64) -> Complex64 {
    polyval(y, z)
}

/// Decoder for a fixed `(K, N)` pair. Grid evaluation folds the
/// radius-weighted samples modulo `K` and applies one `K`-point inverse DFT
/// per circle; [`DizetDecoder::decode_horner`] is the direct reference path.
#[derive(Clone)]
pub struct DizetDecoder {
    params: ModulationParams,
    len: usize,
    norm_outer: f64,
    norm_inner: f64,
    weights_outer: Vec<f64>,
    weights_inner: Vec<f64>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DizetDecoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DizetDecoder")
            .field("params", &self.params)
            .field("len", &self.len)
            .finish_non_exhaustive()
    }
}

impl DizetDecoder {
    pub fn new(params: ModulationParams, len: usize) -> Result<Self> {
        let k = params.k();
        if len < k + 1 {
            return Err(Error::InsufficientLength {
                needed: k + 1,
                got: len,
            });
        }
        let r = params.radius();
        let weights_outer: Vec<f64> = (0..len).map(|n| r.powi(n as i32)).collect();
        let weights_inner: Vec<f64> = weights_outer.iter().map(|w| w.recip()).collect();
        let norm = |w: &[f64]| w.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(DizetDecoder {
            params,
            len,
            norm_outer: norm(&weights_outer),
            norm_inner: norm(&weights_inner),
            weights_outer,
            weights_inner,
            ifft: FftPlanner::new().plan_fft_inverse(k),
        })
    }

    pub fn params(&self) -> &ModulationParams {
        &self.params
    }

    /// Expected received length `N`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Normalization constants `(c⁺, c⁻)`.
    pub fn norms(&self) -> (f64, f64) {
        (self.norm_outer, self.norm_inner)
    }

    fn check(&self, y: &[Complex64]) -> Result<()> {
        if y.len() != self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                got: y.len(),
            });
        }
        Ok(())
    }

    /// `Y(r e^{i2πk/K})` for `k = 0..K` on the outer (`outer = true`) or
    /// inner circle.
    pub fn evaluate_grid(&self, y: &[Complex64], outer: bool) -> Result<Vec<Complex64>> {
        self.check(y)?;
        Ok(self.grid(y, outer))
    }

    fn grid(&self, y: &[Complex64], outer: bool) -> Vec<Complex64> {
        let k = self.params.k();
        let weights = if outer {
            &self.weights_outer
        } else {
            &self.weights_inner
        };
        let mut folded = vec![Complex64::new(0.0, 0.0); k];
        for (n, (s, w)) in y.iter().zip(weights).enumerate() {
            folded[n % k] += s * w;
        }
        self.ifft.process(&mut folded);
        folded
    }

    pub fn decode(&self, y: &[Complex64]) -> Result<DecodedBits> {
        self.check(y)?;
        let outer = self.grid(y, true);
        let inner = self.grid(y, false);
        Ok(self.decide(outer.iter().zip(&inner).map(|(o, i)| (o.norm(), i.norm()))))
    }

    /// Same decisions via one Horner evaluation per test point.
    pub fn decode_horner(&self, y: &[Complex64]) -> Result<DecodedBits> {
        self.check(y)?;
        let k = self.params.k();
        let r = self.params.radius();
        let stats = (0..k).map(|j| {
            let dir = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64);
            (
                eval_at_point(y, dir * r).norm(),
                eval_at_point(y, dir / r).norm(),
            )
        });
        Ok(self.decide(stats))
    }

    fn decide(&self, stats: impl Iterator<Item = (f64, f64)>) -> DecodedBits {
        let (bits, margins) = stats
            .map(|(outer, inner)| {
                let margin = safe_ln(inner / self.norm_inner) - safe_ln(outer / self.norm_outer);
                ((margin > 0.0) as u8, margin)
            })
            .unzip();
        DecodedBits { bits, margins }
    }
}

fn safe_ln(v: f64) -> f64 {
    v.max(f64::MIN_POSITIVE).ln()
}

/// One-shot DiZeT decode of a received sequence.
pub fn dizet_decode(y: &ReceivedSequence, p: &ModulationParams) -> Result<DecodedBits> {
    if y.assumed_k() != p.k() {
        return Err(Error::LengthMismatch {
            expected: p.k(),
            got: y.assumed_k(),
        });
    }
    DizetDecoder::new(*p, y.samples().len())?.decode(y.samples())
}
