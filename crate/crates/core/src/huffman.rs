//! Huffman sequences from binary zero patterns.
//!
//! Every bit of a message picks one zero out of a conjugate-reciprocal pair
//! placed on the base-angle grid `2π(k-1)/K`: the outer zero at radius `R`
//! for a one, the inner zero at `1/R` for a zero. The monic polynomial
//! through those zeros, scaled by the closed-form leading coefficient, is a
//! unit-energy sequence whose aperiodic autocorrelation is the same for
//! every message: a unit central peak and two side peaks `-η` at lags `±K`.
//!
//! Coefficients are recovered from samples of the polynomial on the
//! `(K+1)`-point unit circle followed by one inverse DFT. Sequential
//! convolution with the monomials `(z - α_k)` is not usable here: the partial
//! products over a contiguous arc of zeros grow like `e^{0.3 K}` before the
//! final cancellation, which wipes out the end coefficients for `K ≳ 200`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default radius tuning parameter.
pub const DEFAULT_LAMBDA: f64 = 0.5;

/// Outer zero radius `R = sqrt(1 + 2 λ sin(π/K))`.
///
/// `K = 1` is rejected: `sin(π) = 0` puts both candidate zeros on the unit
/// circle, where they cannot be told apart.
pub fn derive_radius(k: usize, lambda: f64) -> Result<f64> {
    if k < 2 {
        return Err(invalid(format!("K must be at least 2, got {k}")));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    Ok((1.0 + 2.0 * lambda * (PI / k as f64).sin()).sqrt())
}

/// Side-peak magnitude `η = 1/(R^K + R^-K)`.
pub fn derive_eta(radius: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(invalid("K must be at least 1"));
    }
    if !(radius > 1.0) || !radius.is_finite() {
        return Err(invalid(format!(
            "radius must exceed 1 so zeros stay off the unit circle, got {radius}"
        )));
    }
    let rk = radius.powi(k as i32);
    Ok(1.0 / (rk + rk.recip()))
}

/// Geometry of a BMOCZ codebook: `K` zeros at radii `R^{±1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModulationSpec", into = "ModulationSpec")]
pub struct ModulationParams {
    k: usize,
    lambda: f64,
    radius: f64,
    eta: f64,
}

/// Serialized form of [`ModulationParams`]: the derived quantities are
/// recomputed on load.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModulationSpec {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}

impl TryFrom<ModulationSpec> for ModulationParams {
    type Error = Error;

    fn try_from(spec: ModulationSpec) -> Result<Self> {
        ModulationParams::new(spec.k, spec.lambda)
    }
}

impl From<ModulationParams> for ModulationSpec {
    fn from(p: ModulationParams) -> Self {
        ModulationSpec {
            k: p.k,
            lambda: p.lambda,
        }
    }
}

impl ModulationParams {
    pub fn new(k: usize, lambda: f64) -> Result<Self> {
        let radius = derive_radius(k, lambda)?;
        let eta = derive_eta(radius, k)?;
        Ok(ModulationParams {
            k,
            lambda,
            radius,
            eta,
        })
    }

    /// Bits per packet, equal to the number of zeros.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Outer zero radius `R`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Autocorrelation side-peak magnitude.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Number of transmitted samples, `K + 1`.
    pub fn sequence_len(&self) -> usize {
        self.k + 1
    }

    /// Base angle `2π/K`.
    pub fn base_angle(&self) -> f64 {
        2.0 * PI / self.k as f64
    }

    /// Mean of `|x_0|^2` (equivalently `|x_K|^2`) over uniformly drawn
    /// messages: `2^-K (1+R^2)^K / (1+R^{2K})`.
    pub fn expected_end_energy(&self) -> f64 {
        end_energy_closed_form(self.k, self.radius)
    }
}

/// `2^-K (1+R^2)^K / (1+R^{2K})` for any `K` and `R`.
pub fn end_energy_closed_form(k: usize, radius: f64) -> f64 {
    let r2 = radius * radius;
    let k = k as f64;
    // (1+R^2)^K / 2^K evaluated in logs to stay finite for large K.
    let log_num = k * ((1.0 + r2) / 2.0).ln();
    let log_den = (1.0 + r2.powf(k)).ln();
    (log_num - log_den).exp()
}

/// Free-function form of [`ModulationParams::expected_end_energy`].
pub fn expected_end_energy(p: &ModulationParams) -> f64 {
    p.expected_end_energy()
}

/// A `K`-bit message, bits stored in transmission order `m_1..m_K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMessage {
    bits: Vec<u8>,
}

impl BitMessage {
    /// Builds a message from `0`/`1` values.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(invalid(format!("bit values must be 0 or 1, got {b}")));
        }
        Ok(BitMessage { bits })
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        BitMessage {
            bits: bits.iter().map(|&b| b as u8).collect(),
        }
    }

    /// The `index`-th message of `K` bits, `m_1` being the most significant bit.
    pub fn from_index(index: u64, k: usize) -> Self {
        let bits = (0..k)
            .map(|i| {
                let shift = k - 1 - i;
                if shift >= 64 {
                    0
                } else {
                    ((index >> shift) & 1) as u8
                }
            })
            .collect();
        BitMessage { bits }
    }

    pub fn random<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        BitMessage {
            bits: (0..k).map(|_| rng.random::<bool>() as u8).collect(),
        }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of ones, `‖m‖₀`.
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Same message with bit `index` (0-based) inverted.
    pub fn flipped(&self, index: usize) -> Self {
        let mut bits = self.bits.clone();
        bits[index] ^= 1;
        BitMessage { bits }
    }
}

impl fmt::Display for BitMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Zeros `α_k = e^{i2π(k-1)/K} R^{2m_k-1}` of a Huffman polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroPattern {
    zeros: Vec<Complex64>,
}

impl ZeroPattern {
    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }
}

pub fn encode_zeros(m: &BitMessage, p: &ModulationParams) -> Result<ZeroPattern> {
    check_len(m, p)?;
    let step = p.base_angle();
    let zeros = m
        .bits()
        .iter()
        .enumerate()
        .map(|(k, &bit)| {
            let r = if bit == 1 { p.radius } else { p.radius.recip() };
            Complex64::from_polar(r, step * k as f64)
        })
        .collect();
    Ok(ZeroPattern { zeros })
}

fn check_len(m: &BitMessage, p: &ModulationParams) -> Result<()> {
    if m.len() != p.k {
        return Err(Error::LengthMismatch {
            expected: p.k,
            got: m.len(),
        });
    }
    Ok(())
}

/// Closed-form end coefficients `(x_0, x_K)` for a message of weight `w`.
pub fn end_coefficients(p: &ModulationParams, weight: usize) -> (f64, f64) {
    // Ratios rather than powers so R^{2K} cannot overflow.
    let k = p.k as f64;
    let w = weight as f64;
    let ln_r = p.radius.ln();
    let ln_den = (1.0 + (2.0 * k * ln_r).exp()).ln();
    let x0 = (0.5 * (2.0 * w * ln_r - ln_den)).exp();
    let xk = -(0.5 * ((2.0 * k - 2.0 * w) * ln_r - ln_den)).exp();
    (x0, xk)
}

/// Unit-energy transmit samples `x_0..x_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSequence {
    samples: Vec<Complex64>,
    sample_period: f64,
}

impl BasebandSequence {
    /// Wraps arbitrary samples with a normalized sample period of 1.
    pub fn from_samples(samples: Vec<Complex64>) -> Self {
        BasebandSequence {
            samples,
            sample_period: 1.0,
        }
    }

    pub fn with_sample_period(mut self, period: f64) -> Self {
        self.sample_period = period;
        self
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }
}

/// Reusable encoder holding the DFT plan and evaluation grid for one `K`.
#[derive(Clone)]
pub struct HuffmanEncoder {
    params: ModulationParams,
    /// `(K+1)`-th roots of unity.
    grid: Vec<Complex64>,
    /// Unit-modulus zero directions `e^{i2πk/K}`.
    directions: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for HuffmanEncoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HuffmanEncoder")
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl HuffmanEncoder {
    pub fn new(params: ModulationParams) -> Self {
        let k = params.k;
        let m = k + 1;
        let grid = (0..m)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64))
            .collect();
        let directions = (0..k)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        HuffmanEncoder {
            params,
            grid,
            directions,
            fft,
        }
    }

    pub fn params(&self) -> &ModulationParams {
        &self.params
    }

    pub fn encode(&self, m: &BitMessage) -> Result<BasebandSequence> {
        check_len(m, &self.params)?;
        let (r_out, r_in) = (self.params.radius, self.params.radius.recip());
        let zeros: Vec<Complex64> = m
            .bits()
            .iter()
            .zip(&self.directions)
            .map(|(&b, d)| d * if b == 1 { r_out } else { r_in })
            .collect();
        let (x0, xk) = end_coefficients(&self.params, m.weight());
        let mut samples = self.expand(&zeros, xk);
        // The end coefficients are known exactly; this also pins x_0 real.
        samples[0] = Complex64::new(x0, 0.0);
        samples[self.params.k] = Complex64::new(xk, 0.0);
        Ok(BasebandSequence::from_samples(samples))
    }

    /// Coefficients of `leading · ∏(z - zeros[k])`, lowest degree first.
    fn expand(&self, zeros: &[Complex64], leading: f64) -> Vec<Complex64> {
        let m = self.grid.len();
        let mut values: Vec<Complex64> = self.grid.iter().map(|&w| product_at(w, zeros)).collect();
        self.fft.process(&mut values);
        let scale = leading / m as f64;
        values.iter_mut().for_each(|v| *v *= scale);
        values
    }
}

/// `∏(w - zeros[k])` with overflow-safe rescaling of the running product.
fn product_at(w: Complex64, zeros: &[Complex64]) -> Complex64 {
    const BIG: f64 = 1e120;
    let mut acc = Complex64::new(1.0, 0.0);
    let mut exp2: i32 = 0;
    for (i, z) in zeros.iter().enumerate() {
        acc *= w - z;
        if i % 32 == 31 {
            let mag = acc.norm();
            if mag > BIG || (mag < BIG.recip() && mag > 0.0) {
                let e = mag.log2().round() as i32;
                acc /= 2f64.powi(e);
                exp2 += e;
            }
        }
    }
    acc * 2f64.powi(exp2)
}

/// Encodes a message into its unit-energy Huffman sequence.
pub fn encode(m: &BitMessage, p: &ModulationParams) -> Result<BasebandSequence> {
    HuffmanEncoder::new(*p).encode(m)
}

/// Evaluates `Σ x_n z^n` by Horner's rule.
pub fn polyval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Aperiodic autocorrelation; index `n` holds lag `n - (L-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelation {
    coeffs: Vec<Complex64>,
}

impl Autocorrelation {
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Largest lag stored, `L - 1` for an input of length `L`.
    pub fn max_lag(&self) -> usize {
        self.coeffs.len() / 2
    }

    /// Value at signed lag `l`, zero outside the stored range.
    pub fn lag(&self, l: isize) -> Complex64 {
        let idx = l + self.max_lag() as isize;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }
}

/// `a_n = Σ_m x_m conj(x_{m-(n-K)})` over all lags `-K..=K`.
pub fn autocorrelation(x: &[Complex64]) -> Autocorrelation {
    if x.is_empty() {
        return Autocorrelation { coeffs: Vec::new() };
    }
    let len = x.len();
    let k = len as isize - 1;
    let coeffs = (0..2 * len - 1)
        .map(|n| {
            let lag = n as isize - k;
            let lo = lag.max(0) as usize;
            let hi = (k + lag.min(0)) as usize;
            (lo..=hi)
                .map(|m| x[m] * x[(m as isize - lag) as usize].conj())
                .sum()
        })
        .collect();
    Autocorrelation { coeffs }
}
