//! Half-wavelength ULA steering, hybrid beamformers, link budgets and the
//! discrete-time comm/radar channels.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ArraySpec", into = "ArraySpec")]
pub struct ArrayConfig {
    num_antennas: usize,
    num_rf_chains: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ArraySpec {
    #[serde(rename = "N_a")]
    pub num_antennas: usize,
    #[serde(rename = "N_rf")]
    pub num_rf_chains: usize,
}

impl TryFrom<ArraySpec> for ArrayConfig {
    type Error = crate::Error;

    fn try_from(s: ArraySpec) -> Result<Self> {
        ArrayConfig::new(s.num_antennas, s.num_rf_chains)
    }
}

impl From<ArrayConfig> for ArraySpec {
    fn from(c: ArrayConfig) -> Self {
        ArraySpec {
            num_antennas: c.num_antennas,
            num_rf_chains: c.num_rf_chains,
        }
    }
}

impl ArrayConfig {
    pub fn new(num_antennas: usize, num_rf_chains: usize) -> Result<Self> {
        if num_antennas == 0 || num_rf_chains == 0 {
            return Err(invalid("array needs at least one antenna and one RF chain"));
        }
        if num_rf_chains > num_antennas {
            return Err(invalid(format!(
                "N_rf ({num_rf_chains}) exceeds N_a ({num_antennas})"
            )));
        }
        Ok(ArrayConfig {
            num_antennas,
            num_rf_chains,
        })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_rf_chains(&self) -> usize {
        self.num_rf_chains
    }
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            num_antennas: 64,
            num_rf_chains: 4,
        }
    }
}

fn check_angle(angle: f64) -> Result<()> {
    if !(angle.abs() <= PI / 2.0 + 1e-12) {
        return Err(invalid(format!("angle {angle} rad outside [-π/2, π/2]")));
    }
    Ok(())
}

/// ULA response `a_n(φ) = e^{j(n-1)π sin φ}`.
pub fn steering(angle: f64, num_antennas: usize) -> Result<DVector<Complex64>> {
    check_angle(angle)?;
    Ok(steering_unchecked(angle.sin(), num_antennas))
}

fn steering_unchecked(sin_angle: f64, n: usize) -> DVector<Complex64> {
    DVector::from_iterator(
        n,
        (0..n).map(|i| Complex64::from_polar(1.0, PI * i as f64 * sin_angle)),
    )
}

/// Broadside angle of DFT beam `d` out of `n`.
pub fn dft_beam_angle(d: usize, n: usize) -> f64 {
    let mut s = 2.0 * d as f64 / n as f64;
    if s >= 1.0 {
        s -= 2.0;
    }
    s.asin()
}

/// Unit-norm DFT beam `d`, equal to `a(φ_d)/√N`.
pub fn dft_beam(d: usize, n: usize) -> DVector<Complex64> {
    let scale = (n as f64).sqrt().recip();
    DVector::from_iterator(
        n,
        (0..n).map(|i| Complex64::from_polar(scale, 2.0 * PI * (i * d % n) as f64 / n as f64)),
    )
}

/// Tx beam `f` and Rx reduction matrix `U` (`N_a × N_rf`).
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    pub tx_beam: DVector<Complex64>,
    pub rx_matrix: DMatrix<Complex64>,
    /// Codebook indices of the columns of `rx_matrix`.
    pub beam_indices: Vec<usize>,
}

impl Beamformer {
    pub fn num_antennas(&self) -> usize {
        self.tx_beam.len()
    }

    pub fn num_rf_chains(&self) -> usize {
        self.rx_matrix.ncols()
    }

    /// Beam-domain manifold `Uᴴ a(φ)`.
    pub fn beam_response(&self, angle: f64) -> Result<DVector<Complex64>> {
        let a = steering(angle, self.num_antennas())?;
        Ok(self.rx_matrix.adjoint() * a)
    }

    /// Tx array gain `aᴴ(φ) f`.
    pub fn tx_gain(&self, angle: f64) -> Result<Complex64> {
        let a = steering(angle, self.num_antennas())?;
        Ok(a.dotc(&self.tx_beam))
    }
}

/// Tx beam matched to the segment center; Rx columns are the `N_rf` DFT
/// beams closest to the segment (inside-segment first, then by distance to
/// the center, ties to the lower index), ordered by angle.
pub fn make_beamformers(
    segment_center: f64,
    segment_width: f64,
    cfg: &ArrayConfig,
) -> Result<Beamformer> {
    check_angle(segment_center)?;
    if !(segment_width >= 0.0) {
        return Err(invalid("segment width must be non-negative"));
    }
    let n = cfg.num_antennas;
    let tx_beam = steering_unchecked(segment_center.sin(), n) / Complex64::from((n as f64).sqrt());

    let lo = segment_center - segment_width / 2.0;
    let hi = segment_center + segment_width / 2.0;
    let mut candidates: Vec<(f64, f64, usize)> = (0..n)
        .map(|d| {
            let phi = dft_beam_angle(d, n);
            let outside = if phi < lo {
                lo - phi
            } else if phi > hi {
                phi - hi
            } else {
                0.0
            };
            (outside, (phi - segment_center).abs(), d)
        })
        .collect();
    candidates.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut chosen: Vec<usize> = candidates
        .iter()
        .take(cfg.num_rf_chains)
        .map(|c| c.2)
        .collect();
    chosen.sort_by(|&a, &b| dft_beam_angle(a, n).total_cmp(&dft_beam_angle(b, n)));

    let cols: Vec<DVector<Complex64>> = chosen.iter().map(|&d| dft_beam(d, n)).collect();
    Ok(Beamformer {
        tx_beam,
        rx_matrix: DMatrix::from_columns(&cols),
        beam_indices: chosen,
    })
}

/// Link-budget parameters for a 60 GHz mmWave front end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    #[serde(rename = "EIRP")]
    pub eirp_dbm: f64,
    #[serde(rename = "f_c")]
    pub carrier_freq_hz: f64,
    #[serde(rename = "W")]
    pub bandwidth_hz: f64,
    /// Noise power spectral density in W/Hz.
    pub noise_psd: f64,
    #[serde(default = "default_range")]
    pub range_m: f64,
}

fn default_range() -> f64 {
    100.0
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            eirp_dbm: 35.0,
            carrier_freq_hz: 60e9,
            bandwidth_hz: 100e6,
            noise_psd: 2e-21,
            range_m: default_range(),
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("f_c", self.carrier_freq_hz),
            ("W", self.bandwidth_hz),
            ("noise_psd", self.noise_psd),
            ("range", self.range_m),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(format!(
                    "link budget {name} must be positive, got {v}"
                )));
            }
        }
        if !self.eirp_dbm.is_finite() {
            return Err(invalid("EIRP must be finite"));
        }
        Ok(())
    }

    pub fn with_range(mut self, range_m: f64) -> Self {
        self.range_m = range_m;
        self
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    pub fn sample_period(&self) -> f64 {
        self.bandwidth_hz.recip()
    }

    pub fn eirp_watts(&self) -> f64 {
        10f64.powf((self.eirp_dbm - 30.0) / 10.0)
    }

    /// Complex noise variance per sample, `N_0 W`.
    pub fn noise_variance(&self) -> f64 {
        self.noise_psd * self.bandwidth_hz
    }

    /// Range bin width `c/(2W)`.
    pub fn range_cell(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)
    }
}

fn check_range(range: f64) -> Result<()> {
    if !(range > 0.0) || !range.is_finite() {
        return Err(invalid(format!("range must be positive, got {range}")));
    }
    Ok(())
}

/// Two-way radar power gain `λ² σ / ((4π)³ r⁴)` at `lb.range_m`.
pub fn radar_gain(lb: &LinkBudget, rcs_dbsm: f64) -> Result<f64> {
    check_range(lb.range_m)?;
    let lambda = lb.wavelength();
    let sigma = 10f64.powf(rcs_dbsm / 10.0);
    Ok(lambda * lambda * sigma / ((4.0 * PI).powi(3) * lb.range_m.powi(4)))
}

/// One-way free-space gain `λ² / ((4π)² d²)`, Rician factor excluded.
pub fn comm_gain(lb: &LinkBudget, range: f64) -> Result<f64> {
    check_range(range)?;
    let lambda = lb.wavelength();
    Ok(lambda * lambda / ((4.0 * PI).powi(2) * range * range))
}

/// Point target as seen by the co-located radar receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarTarget {
    pub gain: Complex64,
    /// Radians in `[-π/2, π/2]`.
    pub angle: f64,
    /// Round-trip delay in seconds.
    pub delay: f64,
    /// Two-way Doppler `2 v f_c / c` in Hz.
    pub doppler: f64,
}

impl RadarTarget {
    /// Target at `range_m` closing at `velocity_mps`, with gain phase `phase`.
    pub fn from_physical(
        lb: &LinkBudget,
        range_m: f64,
        velocity_mps: f64,
        angle: f64,
        rcs_dbsm: f64,
        phase: f64,
    ) -> Result<Self> {
        check_angle(angle)?;
        let power = radar_gain(&lb.with_range(range_m), rcs_dbsm)?;
        Ok(RadarTarget {
            gain: Complex64::from_polar(power.sqrt(), phase),
            angle,
            delay: 2.0 * range_m / SPEED_OF_LIGHT,
            doppler: 2.0 * velocity_mps * lb.carrier_freq_hz / SPEED_OF_LIGHT,
        })
    }
}

/// One path of the host-to-user channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommPath {
    pub gain: Complex64,
    /// Angle of departure in radians.
    pub aod: f64,
    pub delay: f64,
    /// One-way Doppler `v f_c / c` in Hz.
    pub doppler: f64,
}

/// Circular band-limited delay by `delay_samples` (any real value): a
/// linear phase ramp on the DFT of `s`.
pub fn fractional_delay(s: &[Complex64], delay_samples: f64) -> Vec<Complex64> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    if delay_samples.fract() == 0.0 {
        let shift = (delay_samples as i64).rem_euclid(n as i64) as usize;
        let mut out = s.to_vec();
        out.rotate_right(shift);
        return out;
    }
    let mut planner = FftPlanner::new();
    let mut buf = s.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let f = if 2 * k < n {
            k as f64 / n as f64
        } else {
            k as f64 / n as f64 - 1.0
        };
        *v *= Complex64::from_polar(1.0 / n as f64, -2.0 * PI * f * delay_samples);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf
}

/// Multiplies sample `n` by `e^{j2πν(t0 + nT)}`.
pub fn apply_doppler(s: &mut [Complex64], doppler_hz: f64, sample_period: f64, t0: f64) {
    if doppler_hz == 0.0 {
        return;
    }
    for (n, v) in s.iter_mut().enumerate() {
        let t = t0 + n as f64 * sample_period;
        *v *= Complex64::from_polar(1.0, 2.0 * PI * doppler_hz * t);
    }
}

/// Received `N_rf × N` radar frame:
/// `y[n] = Σ_q ρ_q Uᴴa(φ_q) aᴴ(φ_q) f s(nT - τ_q) e^{j2πν_q (t0 + nT)}`.
///
/// `s` is the full frame (transmit samples followed by zero padding); delays
/// wrap circularly within it.
pub fn apply_radar_channel(
    s: &[Complex64],
    targets: &[RadarTarget],
    bf: &Beamformer,
    sample_period: f64,
    t0: f64,
) -> Result<DMatrix<Complex64>> {
    if !(sample_period > 0.0) {
        return Err(invalid("sample period must be positive"));
    }
    let n = s.len();
    let mut y = DMatrix::from_element(bf.num_rf_chains(), n, ZERO);
    for t in targets {
        if !(t.delay >= 0.0) {
            return Err(invalid("target delay must be non-negative"));
        }
        let beam = bf.beam_response(t.angle)?;
        let scalar = t.gain * bf.tx_gain(t.angle)?;
        let mut echo = fractional_delay(s, t.delay / sample_period);
        apply_doppler(&mut echo, t.doppler, sample_period, t0);
        for (col, e) in echo.iter().enumerate() {
            let v = scalar * e;
            for (row, b) in beam.iter().enumerate() {
                y[(row, col)] += b * v;
            }
        }
    }
    Ok(y)
}

/// Scalar received sequence at a single-antenna user:
/// `r[n] = Σ_p h_p aᴴ(φ_p) f s(nT - τ_p) e^{j2πν_p (t0 + nT)}`.
///
/// The output holds `s.len() + ⌈max τ / T⌉` samples. Integer-sample delays
/// are exact; fractional delays use a band-limited shift on a zero-padded
/// buffer and are truncated to the output length.
pub fn apply_comm_channel(
    s: &[Complex64],
    paths: &[CommPath],
    tx_beam: &DVector<Complex64>,
    sample_period: f64,
    t0: f64,
) -> Result<Vec<Complex64>> {
    if paths.is_empty() {
        return Err(invalid("comm channel needs at least one path"));
    }
    if !(sample_period > 0.0) {
        return Err(invalid("sample period must be positive"));
    }
    let max_delay = paths.iter().map(|p| p.delay).fold(0.0, f64::max);
    if paths.iter().any(|p| !(p.delay >= 0.0)) {
        return Err(invalid("path delay must be non-negative"));
    }
    let spread = (max_delay / sample_period - 1e-9).ceil().max(0.0) as usize;
    let out_len = s.len() + spread;
    let work_len = (2 * out_len).next_power_of_two();
    let mut padded = s.to_vec();
    padded.resize(work_len, ZERO);

    let mut out = vec![ZERO; out_len];
    for p in paths {
        let a = steering(p.aod, tx_beam.len())?;
        let g = p.gain * a.dotc(tx_beam);
        let mut d = fractional_delay(&padded, p.delay / sample_period);
        d.truncate(out_len);
        apply_doppler(&mut d, p.doppler, sample_period, t0);
        for (o, v) in out.iter_mut().zip(&d) {
            *o += g * v;
        }
    }
    Ok(out)
}

/// Circular complex Gaussian sample with variance `variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sd = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * sd, im * sd)
}

/// Adds i.i.d. `CN(0, noise_variance)` noise in place.
pub fn awgn<R: Rng + ?Sized>(x: &mut [Complex64], noise_variance: f64, rng: &mut R) -> Result<()> {
    if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
        return Err(invalid(format!(
            "noise variance must be non-negative, got {noise_variance}"
        )));
    }
    if noise_variance == 0.0 {
        return Ok(());
    }
    for v in x.iter_mut() {
        *v += complex_gaussian(rng, noise_variance);
    }
    Ok(())
}

/// [`awgn`] with a fresh generator seeded from `seed`.
pub fn awgn_seeded(x: &[Complex64], noise_variance: f64, seed: u64) -> Result<Vec<Complex64>> {
    let mut out = x.to_vec();
    awgn(
        &mut out,
        noise_variance,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )?;
    Ok(out)
}

/// Rician tap of mean power `power`: a LOS term with uniform phase plus a
/// diffuse `CN` term, LOS/diffuse power ratio `kappa`.
pub fn rician_tap<R: Rng + ?Sized>(rng: &mut R, power: f64, kappa: f64) -> Complex64 {
    let (los, diffuse) = rician_components(rng, power, kappa);
    los + diffuse
}

/// LOS and diffuse parts of a [`rician_tap`].
pub fn rician_components<R: Rng + ?Sized>(
    rng: &mut R,
    power: f64,
    kappa: f64,
) -> (Complex64, Complex64) {
    let los_power = power * kappa / (kappa + 1.0);
    let diffuse_power = power / (kappa + 1.0);
    let phase = rng.random::<f64>() * 2.0 * PI;
    (
        Complex64::from_polar(los_power.sqrt(), phase),
        complex_gaussian(rng, diffuse_power),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_budget() -> LinkBudget {
        LinkBudget::default()
    }

    #[test]
    fn steering_examples() {
        let a = steering(0.0, 8).unwrap();
        assert!(a
            .iter()
            .all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-12));
        let a = steering(PI / 2.0, 6).unwrap();
        for (i, v) in a.iter().enumerate() {
            let want = if i % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
        for phi in [-1.2, -0.3, 0.0, 0.4, 1.5] {
            assert!((steering(phi, 64).unwrap().norm() - 8.0).abs() < 1e-9);
        }
        assert!(steering(2.0, 4).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ArrayConfig::new(4, 8).is_err());
        assert!(ArrayConfig::new(0, 0).is_err());
        let c: ArrayConfig = serde_json::from_str(r#"{"N_a": 64, "N_rf": 4}"#).unwrap();
        assert_eq!(c, ArrayConfig::default());
        assert!(serde_json::from_str::<ArrayConfig>(r#"{"N_a": 2, "N_rf": 4}"#).is_err());
    }

    #[test]
    fn beamformer_examples() {
        let cfg = ArrayConfig::new(64, 4).unwrap();
        let center = 0.2;
        let bf = make_beamformers(center, 0.1, &cfg).unwrap();
        assert_eq!(bf.rx_matrix.shape(), (64, 4));
        assert!((bf.tx_beam.norm() - 1.0).abs() < 1e-12);
        let a = steering(center, 64).unwrap();
        assert!((bf.tx_beam.dotc(&a) - Complex64::new(8.0, 0.0)).norm() < 1e-9);
        let gram = bf.rx_matrix.adjoint() * &bf.rx_matrix;
        let eye = DMatrix::<Complex64>::identity(4, 4);
        assert!((gram - eye).iter().all(|v| v.norm() < 1e-9));
        // chosen beams straddle the segment center
        let angles: Vec<f64> = bf
            .beam_indices
            .iter()
            .map(|&d| dft_beam_angle(d, 64))
            .collect();
        assert!(angles[0] < center && angles[3] > center);
        assert!(angles.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn beam_angle_wraps() {
        assert_eq!(dft_beam_angle(0, 8), 0.0);
        assert!((dft_beam_angle(4, 8) + PI / 2.0).abs() < 1e-12);
        assert!(dft_beam_angle(7, 8) < 0.0);
        let u = dft_beam(3, 16);
        let a = steering(dft_beam_angle(3, 16), 16).unwrap() / Complex64::new(4.0, 0.0);
        assert!((u - a).norm() < 1e-12);
    }

    #[test]
    fn radar_gain_examples() {
        let lb = default_budget().with_range(50.0);
        let g = radar_gain(&lb, 10.0).unwrap();
        assert!((g / 2.01e-14 - 1.0).abs() < 0.01, "{g}");
        let g2 = radar_gain(&lb.with_range(100.0), 10.0).unwrap();
        assert!((10.0 * (g / g2).log10() - 12.0412).abs() < 1e-3);
        let g3 = radar_gain(&lb, 13.0).unwrap();
        assert!((10.0 * (g3 / g).log10() - 3.0).abs() < 1e-9);
        assert!(radar_gain(&lb.with_range(0.0), 10.0).is_err());
    }

    #[test]
    fn comm_gain_examples() {
        let lb = default_budget();
        let g = comm_gain(&lb, 100.0).unwrap();
        assert!((g / 1.583e-11 - 1.0).abs() < 0.01, "{g}");
        let g2 = comm_gain(&lb, 200.0).unwrap();
        assert!((10.0 * (g / g2).log10() - 6.0206).abs() < 1e-3);
        assert!(comm_gain(&lb, 0.0).is_err());
    }

    #[test]
    fn fractional_delay_preserves_energy() {
        let s: Vec<Complex64> = (0..64)
            .map(|n| Complex64::new((n as f64 * 0.7).sin(), (n as f64 * 0.2).cos()))
            .collect();
        let e0: f64 = s.iter().map(|v| v.norm_sqr()).sum();
        for d in [0.1, 0.5, 3.3, 17.9] {
            let e: f64 = fractional_delay(&s, d).iter().map(|v| v.norm_sqr()).sum();
            assert!((e - e0).abs() < 1e-9 * e0);
        }
        let shifted = fractional_delay(&s, 7.0);
        assert_eq!(shifted[7], s[0]);
        // an integer delay through the spectral path agrees with rotation
        let spectral = fractional_delay(&s, 6.999_999_999_999);
        assert!((spectral[7] - s[0]).norm() < 1e-9);
    }

    #[test]
    fn doppler_is_unitary() {
        let mut s = vec![Complex64::new(0.3, -0.4); 32];
        apply_doppler(&mut s, 1e5, 1e-8, 0.0);
        assert!(s.iter().all(|v| (v.norm() - 0.5).abs() < 1e-12));
        let step = (s[1] / s[0]).arg();
        assert!((step - 2.0 * PI * 1e5 * 1e-8).abs() < 1e-12);
    }

    #[test]
    fn radar_channel_boresight_is_scaling() {
        let cfg = ArrayConfig::new(16, 4).unwrap();
        let bf = make_beamformers(0.0, 0.2, &cfg).unwrap();
        let s: Vec<Complex64> = (0..32).map(|n| Complex64::new(n as f64, 1.0)).collect();
        let rho = Complex64::new(0.3, 0.1);
        let t = RadarTarget {
            gain: rho,
            angle: 0.0,
            delay: 0.0,
            doppler: 0.0,
        };
        let y = apply_radar_channel(&s, &[t], &bf, 1.0, 0.0).unwrap();
        let beam = bf.beam_response(0.0).unwrap();
        let tx = bf.tx_gain(0.0).unwrap();
        for (col, sv) in s.iter().enumerate() {
            for row in 0..4 {
                let want = rho * beam[row] * tx * sv;
                assert!((y[(row, col)] - want).norm() < 1e-9);
            }
        }
        assert!(apply_radar_channel(&s, &[], &bf, 1.0, 0.0)
            .unwrap()
            .iter()
            .all(|v| *v == ZERO));
    }

    #[test]
    fn radar_channel_doppler_ramp() {
        let cfg = ArrayConfig::new(8, 2).unwrap();
        let bf = make_beamformers(0.0, 0.1, &cfg).unwrap();
        let s: Vec<Complex64> = (0..40)
            .map(|n| Complex64::from_polar(1.0 + (n % 3) as f64, n as f64))
            .collect();
        let t = RadarTarget {
            gain: Complex64::new(1.0, 0.0),
            angle: 0.0,
            delay: 0.0,
            doppler: 2e5,
        };
        let period = 1e-8;
        let y = apply_radar_channel(&s, &[t], &bf, period, 0.0).unwrap();
        let ratios: Vec<Complex64> = (0..40).map(|n| y[(0, n)] / s[n]).collect();
        for w in ratios.windows(2) {
            assert!((w[0].norm() - w[1].norm()).abs() < 1e-9);
            let step = (w[1] / w[0]).arg();
            assert!((step - 2.0 * PI * 2e5 * period).abs() < 1e-9);
        }
    }

    #[test]
    fn comm_channel_examples() {
        let cfg = ArrayConfig::new(16, 1).unwrap();
        let bf = make_beamformers(0.0, 0.0, &cfg).unwrap();
        let s: Vec<Complex64> = (0..10).map(|n| Complex64::new(1.0, n as f64)).collect();
        let one = CommPath {
            gain: Complex64::new(1.0, 0.0),
            aod: 0.0,
            delay: 0.0,
            doppler: 0.0,
        };
        let r = apply_comm_channel(&s, &[one], &bf.tx_beam, 1.0, 0.0).unwrap();
        assert_eq!(r.len(), 10);
        for (a, b) in r.iter().zip(&s) {
            assert!((a - b * 4.0).norm() < 1e-9);
        }
        let g = Complex64::new(0.5, -0.5);
        let p0 = CommPath { gain: g, ..one };
        let p1 = CommPath {
            gain: g,
            delay: 1.0,
            ..one
        };
        let r = apply_comm_channel(&s, &[p0, p1], &bf.tx_beam, 1.0, 0.0).unwrap();
        assert_eq!(r.len(), 11);
        for n in 0..11 {
            let prev = if n > 0 { s[n - 1] } else { ZERO };
            let cur = if n < 10 { s[n] } else { ZERO };
            assert!((r[n] - g * 4.0 * (cur + prev)).norm() < 1e-9);
        }
        assert!(apply_comm_channel(&s, &[], &bf.tx_beam, 1.0, 0.0).is_err());
    }

    #[test]
    fn awgn_contract() {
        let x = vec![Complex64::new(1.0, 2.0); 16];
        assert_eq!(awgn_seeded(&x, 0.0, 3).unwrap(), x);
        assert_eq!(
            awgn_seeded(&x, 0.5, 3).unwrap(),
            awgn_seeded(&x, 0.5, 3).unwrap()
        );
        assert_ne!(
            awgn_seeded(&x, 0.5, 3).unwrap(),
            awgn_seeded(&x, 0.5, 4).unwrap()
        );
        assert!(awgn_seeded(&x, -1.0, 3).is_err());
    }

    #[test]
    fn awgn_variance_monte_carlo() {
        let x = vec![ZERO; 1_000_000];
        let y = awgn_seeded(&x, 2.5, 11).unwrap();
        let var = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len() as f64;
        assert!((var / 2.5 - 1.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn rician_power_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let (mut los, mut diffuse, mut total) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let (l, d) = rician_components(&mut rng, 1.0, 10.0);
            los += l.norm_sqr();
            diffuse += d.norm_sqr();
            total += (l + d).norm_sqr();
        }
        assert!((total / n as f64 - 1.0).abs() < 0.01);
        assert!((los / diffuse - 10.0).abs() < 0.15, "{}", los / diffuse);
    }
}
