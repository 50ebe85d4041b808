//! Radar detection and estimation on the correlation output: circular
//! cross-correlation, OS-CFAR, parabolic delay refinement, multi-frame
//! Doppler, beam-domain MUSIC and the ambiguity function.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::array::{steering, SPEED_OF_LIGHT};
use crate::error::{invalid, Error, Result};

/// Circular cross-correlation `ζ[n] = Σ_m x*[m-n] y[m]`, `n = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationProfile {
    values: Vec<Complex64>,
}

impl CorrelationProfile {
    pub fn new(values: Vec<Complex64>) -> Self {
        CorrelationProfile { values }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn power(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Cell of the largest magnitude (lowest index on ties).
    pub fn peak_cell(&self) -> Option<usize> {
        argmax(self.values.iter().map(|v| v.norm_sqr()))
    }

    /// Largest-magnitude cell within `radius` cells of `cell` (circular).
    pub fn refine_peak(&self, cell: usize, radius: usize) -> usize {
        let n = self.values.len() as isize;
        let mut best = cell % self.values.len();
        let mut best_val = self.values[best].norm_sqr();
        for off in -(radius as isize)..=radius as isize {
            let idx = (cell as isize + off).rem_euclid(n) as usize;
            let v = self.values[idx].norm_sqr();
            if v > best_val {
                best = idx;
                best_val = v;
            }
        }
        best
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Frequency-domain correlator against one reference of fixed frame length.
#[derive(Clone)]
pub struct Correlator {
    reference_spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Correlator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Correlator")
            .field("frame_len", &self.reference_spectrum.len())
            .finish_non_exhaustive()
    }
}

impl Correlator {
    /// `reference` is zero-padded to `frame_len`.
    pub fn new(reference: &[Complex64], frame_len: usize) -> Result<Self> {
        let mut planner = FftPlanner::new();
        Self::with_planner(reference, frame_len, &mut planner)
    }

    pub fn with_planner(
        reference: &[Complex64],
        frame_len: usize,
        planner: &mut FftPlanner<f64>,
    ) -> Result<Self> {
        if reference.len() > frame_len || frame_len == 0 {
            return Err(Error::LengthMismatch {
                expected: frame_len,
                got: reference.len(),
            });
        }
        let forward = planner.plan_fft_forward(frame_len);
        let inverse = planner.plan_fft_inverse(frame_len);
        let mut spec = reference.to_vec();
        spec.resize(frame_len, Complex64::new(0.0, 0.0));
        forward.process(&mut spec);
        let scale = 1.0 / frame_len as f64;
        spec.iter_mut().for_each(|v| *v = v.conj() * scale);
        Ok(Correlator {
            reference_spectrum: spec,
            forward,
            inverse,
        })
    }

    pub fn frame_len(&self) -> usize {
        self.reference_spectrum.len()
    }

    pub fn correlate(&self, y: &[Complex64]) -> Result<CorrelationProfile> {
        if y.len() != self.frame_len() {
            return Err(Error::LengthMismatch {
                expected: self.frame_len(),
                got: y.len(),
            });
        }
        let mut buf = y.to_vec();
        self.forward.process(&mut buf);
        for (b, r) in buf.iter_mut().zip(&self.reference_spectrum) {
            *b *= r;
        }
        self.inverse.process(&mut buf);
        Ok(CorrelationProfile::new(buf))
    }
}

/// Circular cross-correlation of `y` with `x` zero-padded to `y.len()`.
pub fn cross_correlate(x: &[Complex64], y: &[Complex64]) -> Result<CorrelationProfile> {
    Correlator::new(x, y.len())?.correlate(y)
}

/// OS-CFAR parameters. `alpha` multiplies the `os_rank`-th smallest of the
/// `2·window` reference powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfarConfig {
    pub window: usize,
    pub guard: usize,
    pub os_rank: usize,
    pub pfa: f64,
    pub alpha: f64,
}

impl CfarConfig {
    /// Calibrates `alpha` for `pfa` under exponential noise.
    pub fn new(window: usize, guard: usize, os_rank: usize, pfa: f64) -> Result<Self> {
        let alpha = calibrate_os_alpha(window, os_rank, pfa)?;
        Ok(CfarConfig {
            window,
            guard,
            os_rank,
            pfa,
            alpha,
        })
    }

    /// Defaults: 12 reference cells and 2 guard cells per side, rank
    /// `⌈0.75 · 24⌉ = 18`.
    pub fn with_pfa(pfa: f64) -> Result<Self> {
        let window = 12;
        let rank = (0.75 * (2 * window) as f64).ceil() as usize;
        Self::new(window, 2, rank, pfa)
    }

    pub fn min_frame_len(&self) -> usize {
        2 * (self.window + self.guard) + 1
    }

    fn validate(&self) -> Result<()> {
        validate_rank(self.window, self.os_rank)?;
        if !(self.alpha >= 0.0) {
            return Err(invalid("CFAR alpha must be non-negative"));
        }
        Ok(())
    }
}

fn validate_rank(window: usize, os_rank: usize) -> Result<()> {
    if window == 0 {
        return Err(invalid("CFAR window must be at least 1"));
    }
    if os_rank == 0 || os_rank > 2 * window {
        return Err(invalid(format!(
            "order-statistic rank {os_rank} outside 1..={}",
            2 * window
        )));
    }
    Ok(())
}

/// False-alarm probability of OS-CFAR on exponential noise:
/// `∏_{i<k} (M-i)/(M-i+α)` with `M = 2·window`.
pub fn os_cfar_pfa(window: usize, os_rank: usize, alpha: f64) -> f64 {
    let m = (2 * window) as f64;
    (0..os_rank)
        .map(|i| (m - i as f64) / (m - i as f64 + alpha))
        .product()
}

/// Solves `os_cfar_pfa(window, os_rank, α) = pfa` for `α` by bisection.
pub fn calibrate_os_alpha(window: usize, os_rank: usize, pfa: f64) -> Result<f64> {
    validate_rank(window, os_rank)?;
    if !(pfa > 0.0 && pfa <= 1.0) {
        return Err(invalid(format!("pfa must lie in (0, 1], got {pfa}")));
    }
    if pfa == 1.0 {
        return Ok(0.0);
    }
    let f = |a: f64| os_cfar_pfa(window, os_rank, a) - pfa;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return Err(Error::NoBracket(format!("no alpha reaches pfa {pfa}")));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub cell: usize,
    pub statistic: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DetectionList {
    pub entries: Vec<Detection>,
}

impl DetectionList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cells(&self) -> Vec<usize> {
        self.entries.iter().map(|d| d.cell).collect()
    }

    /// Detections that are local maxima of the statistic among detected
    /// cells within `radius` (circular over `frame_len`), strongest first.
    pub fn local_peaks(&self, radius: usize, frame_len: usize) -> Vec<Detection> {
        let circ = |a: usize, b: usize| {
            let d = a.abs_diff(b);
            d.min(frame_len - d)
        };
        let mut peaks: Vec<Detection> = self
            .entries
            .iter()
            .filter(|d| {
                self.entries.iter().all(|o| {
                    o.cell == d.cell
                        || circ(o.cell, d.cell) > radius
                        || o.statistic < d.statistic
                        || (o.statistic == d.statistic && o.cell > d.cell)
                })
            })
            .copied()
            .collect();
        peaks.sort_by(|a, b| b.statistic.total_cmp(&a.statistic));
        peaks
    }
}

/// OS-CFAR on the power `|ζ|²` of a correlation profile.
pub fn os_cfar(profile: &CorrelationProfile, cfg: &CfarConfig) -> Result<DetectionList> {
    os_cfar_power(&profile.power(), cfg)
}

/// OS-CFAR on raw power cells with circular reference windows.
pub fn os_cfar_power(power: &[f64], cfg: &CfarConfig) -> Result<DetectionList> {
    let mut entries = Vec::new();
    os_cfar_scan(power, cfg, |cell, statistic, threshold| {
        entries.push(Detection {
            cell,
            statistic,
            threshold,
        })
    })?;
    Ok(DetectionList { entries })
}

/// Number of OS-CFAR crossings, without collecting them.
pub fn os_cfar_count(power: &[f64], cfg: &CfarConfig) -> Result<usize> {
    let mut count = 0;
    os_cfar_scan(power, cfg, |_, _, _| count += 1)?;
    Ok(count)
}

fn os_cfar_scan(
    power: &[f64],
    cfg: &CfarConfig,
    mut on_detect: impl FnMut(usize, f64, f64),
) -> Result<()> {
    cfg.validate()?;
    let n = power.len();
    if n < cfg.min_frame_len() {
        return Err(Error::InsufficientLength {
            needed: cfg.min_frame_len(),
            got: n,
        });
    }
    let mut reference = Vec::with_capacity(2 * cfg.window);
    for cell in 0..n {
        reference.clear();
        for off in cfg.guard + 1..=cfg.guard + cfg.window {
            reference.push(power[(cell + off) % n]);
            reference.push(power[(cell + n - off % n) % n]);
        }
        let k = cfg.os_rank - 1;
        let (_, kth, _) = reference.select_nth_unstable_by(k, f64::total_cmp);
        let threshold = cfg.alpha * *kth;
        if power[cell] > threshold {
            on_detect(cell, power[cell], threshold);
        }
    }
    Ok(())
}

/// Vertex offset of the parabola through `(-1, left), (0, center), (1, right)`,
/// clamped to `[-0.5, 0.5]`; zero for flat curvature.
pub fn parabolic_offset(left: f64, center: f64, right: f64) -> f64 {
    let den = left - 2.0 * center + right;
    if den == 0.0 || !den.is_finite() {
        return 0.0;
    }
    (0.5 * (left - right) / den).clamp(-0.5, 0.5)
}

/// Integer peak plus parabolic fractional offset, in seconds.
pub fn estimate_delay(
    profile: &CorrelationProfile,
    peak_cell: usize,
    sample_period: f64,
) -> Result<f64> {
    let n = profile.len();
    if n < 3 {
        return Err(Error::InsufficientLength { needed: 3, got: n });
    }
    if peak_cell >= n {
        return Err(invalid(format!(
            "peak cell {peak_cell} outside profile of {n}"
        )));
    }
    let mag = |i: usize| profile.values()[i].norm();
    let delta = parabolic_offset(
        mag((peak_cell + n - 1) % n),
        mag(peak_cell),
        mag((peak_cell + 1) % n),
    );
    Ok((peak_cell as f64 + delta) * sample_period)
}

/// Unwraps by accumulating the nearest-multiple-of-2π step between
/// consecutive phases.
pub fn unwrap_phases(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    for (i, &p) in phases.iter().enumerate() {
        if i > 0 {
            let prev_raw = phases[i - 1];
            let d = p - prev_raw;
            offset -= (d / (2.0 * PI)).round() * 2.0 * PI;
        }
        out.push(p + offset);
    }
    out
}

/// Doppler in Hz from per-frame peak phases by ordinary least squares.
pub fn estimate_doppler(peak_phases: &[f64], frame_times: &[f64]) -> Result<f64> {
    estimate_doppler_weighted(peak_phases, frame_times, None)
}

/// Weighted least-squares slope of the unwrapped phases over `2π`.
pub fn estimate_doppler_weighted(
    peak_phases: &[f64],
    frame_times: &[f64],
    weights: Option<&[f64]>,
) -> Result<f64> {
    let n = peak_phases.len();
    if n < 2 {
        return Err(Error::InsufficientLength { needed: 2, got: n });
    }
    if frame_times.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: frame_times.len(),
        });
    }
    let uniform = vec![1.0; n];
    let w = match weights {
        Some(w) if w.len() != n => {
            return Err(Error::LengthMismatch {
                expected: n,
                got: w.len(),
            })
        }
        Some(w) => w,
        None => &uniform,
    };
    if w.iter().any(|&v| !(v >= 0.0)) {
        return Err(invalid("weights must be non-negative"));
    }
    let phases = unwrap_phases(peak_phases);
    let sw: f64 = w.iter().sum();
    let t_mean = w.iter().zip(frame_times).map(|(a, t)| a * t).sum::<f64>() / sw;
    let p_mean = w.iter().zip(&phases).map(|(a, p)| a * p).sum::<f64>() / sw;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for ((a, t), p) in w.iter().zip(frame_times).zip(&phases) {
        sxy += a * (t - t_mean) * (p - p_mean);
        sxx += a * (t - t_mean) * (t - t_mean);
    }
    if !(sxx > 0.0) {
        return Err(invalid("frame times must not all coincide"));
    }
    Ok(sxy / sxx / (2.0 * PI))
}

/// `C = (1/N) Σ_n y[n] y[n]ᴴ` for `y` with one snapshot per column.
pub fn sample_covariance(y: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = y.ncols();
    if n == 0 {
        return Err(Error::InsufficientLength { needed: 1, got: 0 });
    }
    Ok(y * y.adjoint() / Complex64::from(n as f64))
}

/// Angular search range for MUSIC, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSearch {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl AngleSearch {
    /// Default grid of 0.5° over `[lo, hi]`.
    pub fn new(lo: f64, hi: f64) -> Self {
        AngleSearch {
            lo,
            hi,
            step: 0.5f64.to_radians(),
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

/// Noise-subspace basis from the `N_rf - q` smallest eigenvalues of `c`.
fn noise_subspace(c: &DMatrix<Complex64>, q: usize) -> DMatrix<Complex64> {
    let eig = nalgebra::SymmetricEigen::new(c.clone());
    let mut order: Vec<usize> = (0..c.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let cols: Vec<DVector<Complex64>> = order[..c.nrows() - q]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    DMatrix::from_columns(&cols)
}

/// Normalized null spectrum of one covariance estimate.
struct NullSpectrum {
    proj: DMatrix<Complex64>,
    u_adj: DMatrix<Complex64>,
}

impl NullSpectrum {
    fn new(c: &DMatrix<Complex64>, u: &DMatrix<Complex64>, q: usize) -> Self {
        let en = noise_subspace(c, q);
        let u_adj = u.adjoint();
        NullSpectrum {
            proj: en.adjoint() * &u_adj,
            u_adj,
        }
    }

    fn at(&self, phi: f64) -> Result<f64> {
        let a = steering(phi, self.u_adj.ncols())?;
        let gain = (&self.u_adj * &a).norm_squared();
        if gain == 0.0 {
            return Ok(1.0);
        }
        Ok((&self.proj * a).norm_squared() / gain)
    }
}

/// Null spectrum `‖E_nᴴ Uᴴ a(φ)‖² / ‖Uᴴ a(φ)‖²` over the search grid
/// (`1/` of the MUSIC pseudo-spectrum). Without the denominator, angles
/// where the selected beams have little gain look like nulls.
pub fn music_null_spectrum(
    c: &DMatrix<Complex64>,
    u: &DMatrix<Complex64>,
    q: usize,
    search: &AngleSearch,
) -> Result<Vec<(f64, f64)>> {
    check_music(c, u, q)?;
    let ns = NullSpectrum::new(c, u, q);
    search
        .grid()
        .into_iter()
        .map(|phi| Ok((phi, ns.at(phi)?)))
        .collect()
}

fn check_music(c: &DMatrix<Complex64>, u: &DMatrix<Complex64>, q: usize) -> Result<()> {
    let nrf = u.ncols();
    if c.nrows() != nrf || c.ncols() != nrf {
        return Err(Error::LengthMismatch {
            expected: nrf,
            got: c.nrows(),
        });
    }
    if q >= nrf {
        return Err(invalid(format!(
            "MUSIC needs fewer sources ({q}) than RF chains ({nrf})"
        )));
    }
    Ok(())
}

const REFINE_STEPS: usize = 8;

/// Beam-domain MUSIC: the `q` strongest pseudo-spectrum peaks in `search`.
/// Each grid minimum is refined by repeated parabolic interpolation of the
/// null spectrum with a stencil shrinking by 4 per step.
pub fn music_angles(
    c: &DMatrix<Complex64>,
    u: &DMatrix<Complex64>,
    q: usize,
    search: &AngleSearch,
) -> Result<Vec<f64>> {
    check_music(c, u, q)?;
    if q == 0 {
        return Ok(Vec::new());
    }
    let ns = NullSpectrum::new(c, u, q);
    let spec = search
        .grid()
        .into_iter()
        .map(|phi| Ok((phi, ns.at(phi)?)))
        .collect::<Result<Vec<_>>>()?;
    let n = spec.len();
    let val = |i: usize| spec[i].1;
    let mut minima: Vec<usize> = (0..n)
        .filter(|&i| {
            let left_ok = i == 0 || val(i) < val(i - 1);
            let right_ok = i + 1 == n || val(i) <= val(i + 1);
            left_ok && right_ok
        })
        .collect();
    minima.sort_by(|&a, &b| val(a).total_cmp(&val(b)));
    minima
        .into_iter()
        .take(q)
        .map(|i| {
            if i == 0 || i + 1 == n {
                return Ok(spec[i].0);
            }
            let mut est = spec[i].0;
            let mut h = search.step;
            for _ in 0..REFINE_STEPS {
                let lo = (est - h).max(search.lo);
                let hi = (est + h).min(search.hi);
                let h_eff = (est - lo).min(hi - est);
                if h_eff <= 0.0 {
                    break;
                }
                let delta = parabolic_offset(ns.at(est - h_eff)?, ns.at(est)?, ns.at(est + h_eff)?);
                est += delta * h_eff;
                h /= 4.0;
            }
            Ok(est)
        })
        .collect()
}

/// `|AF[l, p]|` for lags `-max_lag..=max_lag` and Doppler bins
/// `p = -P/2..P/2` (zero-Doppler at column `P/2`).
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySurface {
    pub max_lag: usize,
    pub doppler_bins: usize,
    values: Vec<f64>,
}

impl AmbiguitySurface {
    pub fn lags(&self) -> impl Iterator<Item = isize> {
        let m = self.max_lag as isize;
        -m..=m
    }

    pub fn doppler_indices(&self) -> impl Iterator<Item = isize> {
        let p = self.doppler_bins as isize;
        -(p / 2)..p - p / 2
    }

    pub fn get(&self, lag: isize, doppler: isize) -> f64 {
        let row = (lag + self.max_lag as isize) as usize;
        let col = (doppler + (self.doppler_bins / 2) as isize) as usize;
        self.values[row * self.doppler_bins + col]
    }

    pub fn zero_doppler_cut(&self) -> Vec<f64> {
        self.lags().map(|l| self.get(l, 0)).collect()
    }

    /// Largest zero-Doppler sidelobe relative to the lag-0 peak.
    pub fn peak_sidelobe_level(&self) -> f64 {
        let peak = self.get(0, 0);
        self.lags()
            .filter(|&l| l != 0)
            .map(|l| self.get(l, 0))
            .fold(0.0, f64::max)
            / peak
    }
}

/// `AF[l, p] = |Σ_n x[n] conj(x[n-l]) e^{j2πpn/P}|`.
pub fn ambiguity_function(
    x: &[Complex64],
    max_lag: usize,
    doppler_bins: usize,
) -> Result<AmbiguitySurface> {
    if x.is_empty() {
        return Err(Error::InsufficientLength { needed: 1, got: 0 });
    }
    if max_lag >= x.len() {
        return Err(invalid(format!(
            "max lag {max_lag} exceeds sequence span {}",
            x.len() - 1
        )));
    }
    if doppler_bins == 0 {
        return Err(invalid("need at least one Doppler bin"));
    }
    let fft = FftPlanner::new().plan_fft_inverse(doppler_bins);
    let rows = 2 * max_lag + 1;
    let mut values = vec![0.0; rows * doppler_bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); doppler_bins];
    let half = doppler_bins / 2;
    for (row, lag) in (-(max_lag as isize)..=max_lag as isize).enumerate() {
        buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for n in 0..x.len() {
            let m = n as isize - lag;
            if m >= 0 && (m as usize) < x.len() {
                buf[n % doppler_bins] += x[n] * x[m as usize].conj();
            }
        }
        fft.process(&mut buf);
        for p in 0..doppler_bins {
            // column c holds Doppler index c - half
            let src = (p + doppler_bins - half) % doppler_bins;
            values[row * doppler_bins + p] = buf[src].norm();
        }
    }
    Ok(AmbiguitySurface {
        max_lag,
        doppler_bins,
        values,
    })
}

/// Per-target estimate in physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub delay_s: f64,
    pub range_m: f64,
    pub doppler_hz: f64,
    pub velocity_mps: f64,
    pub angle_rad: f64,
}

impl EstimateReport {
    pub fn new(delay_s: f64, doppler_hz: f64, angle_rad: f64, carrier_freq_hz: f64) -> Self {
        EstimateReport {
            delay_s,
            range_m: SPEED_OF_LIGHT * delay_s / 2.0,
            doppler_hz,
            velocity_mps: SPEED_OF_LIGHT * doppler_hz / (2.0 * carrier_freq_hz),
            angle_rad,
        }
    }
}

/// JSON record for one detection and its estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub cell: usize,
    pub range_m: f64,
    pub velocity_mps: f64,
    pub angle_deg: f64,
    pub statistic: f64,
    pub threshold: f64,
}

impl DetectionRecord {
    pub fn new(det: &Detection, est: &EstimateReport) -> Self {
        DetectionRecord {
            cell: det.cell,
            range_m: est.range_m,
            velocity_mps: est.velocity_mps,
            angle_deg: est.angle_rad.to_degrees(),
            statistic: det.statistic,
            threshold: det.threshold,
        }
    }
}
