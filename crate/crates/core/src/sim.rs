//! Monte Carlo experiments: BER sweeps over AWGN / flat Rayleigh /
//! frequency-selective Rician channels, radar estimation sweeps, and
//! noise-only OS-CFAR calibration runs.
//!
//! Every trial draws from its own ChaCha stream keyed by `(seed, point,
//! trial)` and per-trial results are reduced in trial order, so the worker
//! count never changes the output.
//!
//! SNR convention for the comm path: a packet carries unit energy over `K`
//! information bits, so `Eb/N0 = 1/(K σ²)` and the per-sample noise variance
//! is `σ² = 1/(K · 10^{snr_db/10})`. Fading taps have unit mean power.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::array::{
    apply_radar_channel, awgn, complex_gaussian, make_beamformers, radar_gain, rician_tap,
    ArrayConfig, Beamformer, LinkBudget, RadarTarget, SPEED_OF_LIGHT,
};
use crate::dizet::DizetDecoder;
use crate::error::{invalid, Result};
use crate::huffman::{BitMessage, HuffmanEncoder, ModulationParams};
use crate::radar::{
    estimate_delay, estimate_doppler, music_angles, os_cfar, os_cfar_count, AngleSearch,
    CfarConfig, CorrelationProfile, Correlator,
};

/// Rician factor of every tap in the frequency-selective profile.
pub const RICIAN_FACTOR: f64 = 10.0;
/// Number of taps (LOS + delayed) in the frequency-selective profile.
pub const SELECTIVE_TAPS: usize = 4;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn trial_stream(point: usize, trial: usize) -> u64 {
    ((point as u64) << 40) | trial as u64
}

/// Coherent BPSK bit error rate `Q(√(2 Eb/N0))`.
pub fn bpsk_ber(ebn0_db: f64) -> f64 {
    0.5 * erfc(10f64.powf(ebn0_db / 10.0).sqrt())
}

/// `Eb/N0` in dB at which coherent BPSK reaches `ber`.
pub fn bpsk_ebn0_db_for(ber: f64) -> f64 {
    let x = erfc_inv(2.0 * ber);
    10.0 * (x * x).log10()
}

/// Per-sample noise variance for a unit-energy `K`-bit packet at `snr_db`.
pub fn noise_variance_for(k: usize, snr_db: f64) -> f64 {
    1.0 / (k as f64 * 10f64.powf(snr_db / 10.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    #[default]
    Awgn,
    RayleighFlat,
    RicianSelective,
}

impl ChannelModel {
    /// Channel memory in samples beyond the first tap.
    pub fn memory(&self) -> usize {
        match self {
            ChannelModel::RicianSelective => SELECTIVE_TAPS - 1,
            _ => 0,
        }
    }

    /// Draws one channel impulse response (one tap per sample delay).
    pub fn draw_taps<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        match self {
            ChannelModel::Awgn => vec![Complex64::new(1.0, 0.0)],
            ChannelModel::RayleighFlat => vec![complex_gaussian(rng, 1.0)],
            ChannelModel::RicianSelective => {
                let weights: Vec<f64> = (0..SELECTIVE_TAPS).map(|i| (-(i as f64)).exp()).collect();
                let total: f64 = weights.iter().sum();
                weights
                    .iter()
                    .map(|w| rician_tap(rng, w / total, RICIAN_FACTOR))
                    .collect()
            }
        }
    }
}

/// Linear convolution `h ∗ x`.
pub fn convolve(h: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
    if h.is_empty() || x.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); h.len() + x.len() - 1];
    for (i, hv) in h.iter().enumerate() {
        for (j, xv) in x.iter().enumerate() {
            out[i + j] += hv * xv;
        }
    }
    out
}

/// Beam segments visited in turn, each for one CPI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSchedule {
    /// `[lo, hi]` in degrees.
    pub segments_deg: Vec<[f64; 2]>,
    #[serde(default = "default_frames_per_cpi")]
    pub frames_per_cpi: usize,
    /// Samples per frame (transmit samples plus zero padding). Defaults to
    /// the next power of two at or above `2(K+1)`.
    #[serde(default)]
    pub frame_len: Option<usize>,
    /// Beam switching dead time in seconds.
    #[serde(default)]
    pub t_swc: f64,
}

fn default_frames_per_cpi() -> usize {
    16
}

impl Default for FrameSchedule {
    fn default() -> Self {
        FrameSchedule {
            segments_deg: vec![[-4.0, 4.0]],
            frames_per_cpi: default_frames_per_cpi(),
            frame_len: None,
            t_swc: 0.0,
        }
    }
}

impl FrameSchedule {
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.segments_deg.is_empty() {
            return Err(invalid("schedule needs at least one segment"));
        }
        let mut sorted = self.segments_deg.clone();
        sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
        for s in &sorted {
            if !(s[0] < s[1]) || s[0] < -90.0 || s[1] > 90.0 {
                return Err(invalid(format!("bad segment [{}, {}] deg", s[0], s[1])));
            }
        }
        if sorted.windows(2).any(|w| w[1][0] < w[0][1]) {
            return Err(invalid("segments overlap"));
        }
        if self.frames_per_cpi == 0 {
            return Err(invalid("frames_per_cpi must be at least 1"));
        }
        if let Some(n) = self.frame_len {
            if n < k + 1 {
                return Err(invalid(format!(
                    "frame_len {n} shorter than K+1 = {}",
                    k + 1
                )));
            }
        }
        if !(self.t_swc >= 0.0) {
            return Err(invalid("t_swc must be non-negative"));
        }
        Ok(())
    }

    pub fn frame_len(&self, k: usize) -> usize {
        self.frame_len
            .unwrap_or_else(|| (2 * (k + 1)).next_power_of_two())
    }

    /// Segment `i` as `(lo, hi)` radians.
    pub fn segment(&self, i: usize) -> (f64, f64) {
        let s = self.segments_deg[i];
        (s[0].to_radians(), s[1].to_radians())
    }

    /// Index of the segment containing `angle` (radians).
    pub fn segment_of(&self, angle: f64) -> Option<usize> {
        (0..self.segments_deg.len()).find(|&i| {
            let (lo, hi) = self.segment(i);
            angle >= lo && angle <= hi
        })
    }

    pub fn t_cpi(&self, k: usize, sample_period: f64) -> f64 {
        self.frames_per_cpi as f64 * self.frame_len(k) as f64 * sample_period
    }

    /// Start time of frame `frame` within the CPI of segment `segment`.
    pub fn frame_start(&self, k: usize, sample_period: f64, segment: usize, frame: usize) -> f64 {
        segment as f64 * (self.t_cpi(k, sample_period) + self.t_swc)
            + frame as f64 * self.frame_len(k) as f64 * sample_period
    }
}

/// Physical description of a point target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub range_m: f64,
    #[serde(default)]
    pub velocity_mps: f64,
    #[serde(default)]
    pub angle_deg: f64,
    #[serde(default = "default_rcs")]
    pub rcs_dbsm: f64,
}

fn default_rcs() -> f64 {
    10.0
}

/// Physical description of a host-to-user path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub range_m: f64,
    #[serde(default)]
    pub velocity_mps: f64,
    #[serde(default)]
    pub aod_deg: f64,
    #[serde(default = "default_kappa")]
    pub rician_factor: f64,
}

fn default_kappa() -> f64 {
    RICIAN_FACTOR
}

/// Scenario file contents: link budget plus targets and comm paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub link: LinkBudget,
    #[serde(default)]
    pub targets: Vec<TargetSpec>,
    #[serde(default)]
    pub paths: Vec<PathSpec>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        for t in &self.targets {
            validate_target(t)?;
        }
        for p in &self.paths {
            if !(p.range_m > 0.0) || p.aod_deg.abs() > 90.0 || !(p.rician_factor >= 0.0) {
                return Err(invalid(format!("bad path {p:?}")));
            }
        }
        Ok(())
    }
}

fn validate_target(t: &TargetSpec) -> Result<()> {
    if !(t.range_m > 0.0) || !t.range_m.is_finite() {
        return Err(invalid(format!(
            "target range must be positive, got {}",
            t.range_m
        )));
    }
    if !(t.angle_deg.abs() <= 90.0) || !t.velocity_mps.is_finite() || !t.rcs_dbsm.is_finite() {
        return Err(invalid(format!("bad target {t:?}")));
    }
    Ok(())
}

/// OS-CFAR settings as they appear in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfarSettings {
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_guard")]
    pub guard: usize,
    /// Defaults to `⌈0.75 · 2·window⌉`.
    #[serde(default)]
    pub os_rank: Option<usize>,
    #[serde(rename = "P_fa", default = "default_pfa")]
    pub pfa: f64,
}

fn default_window() -> usize {
    12
}
fn default_guard() -> usize {
    2
}
fn default_pfa() -> f64 {
    1e-4
}

impl Default for CfarSettings {
    fn default() -> Self {
        CfarSettings {
            window: default_window(),
            guard: default_guard(),
            os_rank: None,
            pfa: default_pfa(),
        }
    }
}

impl CfarSettings {
    pub fn build(&self) -> Result<CfarConfig> {
        let rank = self
            .os_rank
            .unwrap_or_else(|| (0.75 * (2 * self.window) as f64).ceil() as usize);
        CfarConfig::new(self.window, self.guard, rank, self.pfa)
    }
}

/// How radar runs set the receiver noise level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadarNoise {
    /// `N_0 W` per RF chain from the link budget; one sweep point.
    #[default]
    LinkBudget,
    /// Sweep `snr_grid_db` as the post-correlation SNR of the first target.
    PostCorrelationSnr,
}

fn default_snr_grid() -> Vec<f64> {
    vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0]
}

fn default_trials() -> usize {
    1000
}

/// Full experiment configuration (JSON-compatible).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub modulation: ModulationParams,
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub link: LinkBudget,
    #[serde(default)]
    pub schedule: FrameSchedule,
    #[serde(default)]
    pub channel_model: ChannelModel,
    #[serde(default = "default_snr_grid")]
    pub snr_grid_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cfar: CfarSettings,
    #[serde(default)]
    pub radar_noise: RadarNoise,
    #[serde(default)]
    pub targets: Vec<TargetSpec>,
}

impl SimConfig {
    /// Default array, link budget, schedule and CFAR settings around `modulation`.
    pub fn new(modulation: ModulationParams) -> Self {
        SimConfig {
            modulation,
            array: ArrayConfig::default(),
            link: LinkBudget::default(),
            schedule: FrameSchedule::default(),
            channel_model: ChannelModel::default(),
            snr_grid_db: default_snr_grid(),
            trials: default_trials(),
            seed: 0,
            cfar: CfarSettings::default(),
            radar_noise: RadarNoise::default(),
            targets: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.snr_grid_db.is_empty() {
            return Err(invalid("snr_grid_db must not be empty"));
        }
        if self.snr_grid_db.iter().any(|s| s.is_nan()) {
            return Err(invalid("snr_grid_db contains NaN"));
        }
        self.link.validate()?;
        self.schedule.validate(self.modulation.k())?;
        for t in &self.targets {
            validate_target(t)?;
        }
        self.cfar.build()?;
        Ok(())
    }

    pub fn frame_len(&self) -> usize {
        self.schedule.frame_len(self.modulation.k())
    }
}

/// One BER sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub noise_variance: f64,
    pub packets: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub bpsk_ber: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerResult {
    pub k: usize,
    pub channel_model: ChannelModel,
    pub points: Vec<BerPoint>,
}

impl BerResult {
    pub const CSV_HEADER: &'static str = "snr_db,noise_variance,packets,bit_errors,ber,bpsk_ber";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{},{:e},{},{},{:e},{:e}\n",
                p.snr_db, p.noise_variance, p.packets, p.bit_errors, p.ber, p.bpsk_ber
            ));
        }
        out
    }
}

/// BER of DiZeT decoding versus SNR on `cfg.channel_model`.
pub fn run_ber(cfg: &SimConfig) -> Result<BerResult> {
    cfg.validate()?;
    let p = cfg.modulation;
    let k = p.k();
    let encoder = HuffmanEncoder::new(p);
    let model = cfg.channel_model;
    let decoder = DizetDecoder::new(p, k + 1 + model.memory())?;

    let points = cfg
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(point, &snr_db)| {
            let var = noise_variance_for(k, snr_db);
            let errors: Result<Vec<u64>> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = stream_rng(cfg.seed, trial_stream(point, trial));
                    let m = BitMessage::random(k, &mut rng);
                    let x = encoder.encode(&m)?;
                    let taps = model.draw_taps(&mut rng);
                    let mut y = convolve(&taps, x.samples());
                    awgn(&mut y, var, &mut rng)?;
                    Ok(decoder.decode(&y)?.bit_errors(&m) as u64)
                })
                .collect();
            let bit_errors: u64 = errors?.iter().sum();
            let packets = cfg.trials as u64;
            Ok(BerPoint {
                snr_db,
                noise_variance: var,
                packets,
                bit_errors,
                ber: bit_errors as f64 / (packets * k as u64) as f64,
                bpsk_ber: bpsk_ber(snr_db),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BerResult {
        k,
        channel_model: model,
        points,
    })
}

/// One radar sweep point. `sweep` is the post-correlation SNR in dB or the
/// target range in meters, depending on `sweep_kind`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarPoint {
    pub sweep: f64,
    pub noise_variance: f64,
    pub trials: u64,
    pub targets: u64,
    pub detections: u64,
    pub detection_rate: f64,
    pub rmse_range_m: f64,
    pub rmse_velocity_mps: f64,
    pub rmse_angle_deg: f64,
    pub false_alarms: u64,
    pub cells: u64,
    pub false_alarm_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    LinkBudget,
    SnrDb,
    RangeM,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarResult {
    pub k: usize,
    pub sweep_kind: SweepKind,
    pub points: Vec<RadarPoint>,
}

impl RadarResult {
    pub const CSV_HEADER: &'static str = "sweep,noise_variance,trials,targets,detections,detection_rate,rmse_range_m,rmse_velocity_mps,rmse_angle_deg,false_alarms,cells,false_alarm_rate";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{},{:e},{},{},{},{},{:e},{:e},{:e},{},{},{:e}\n",
                p.sweep,
                p.noise_variance,
                p.trials,
                p.targets,
                p.detections,
                p.detection_rate,
                p.rmse_range_m,
                p.rmse_velocity_mps,
                p.rmse_angle_deg,
                p.false_alarms,
                p.cells,
                p.false_alarm_rate
            ));
        }
        out
    }
}

/// Errors of one detected target in one trial.
#[derive(Debug, Clone, Copy, Default)]
struct TargetErrors {
    range: f64,
    velocity: f64,
    angle_deg: f64,
}

#[derive(Debug, Default)]
struct TrialOutcome {
    errors: Vec<Option<TargetErrors>>,
    false_alarms: u64,
}

/// Everything that stays fixed across the trials of one sweep point.
struct RadarSetup<'a> {
    cfg: &'a SimConfig,
    encoder: HuffmanEncoder,
    cfar: CfarConfig,
    bf: Beamformer,
    combiner: DVector<Complex64>,
    search: AngleSearch,
    segment: usize,
    frame_len: usize,
    sample_period: f64,
    amplitude: f64,
    noise_variance: f64,
    targets: Vec<TargetSpec>,
}

impl<'a> RadarSetup<'a> {
    fn new(cfg: &'a SimConfig, targets: &[TargetSpec]) -> Result<Self> {
        cfg.validate()?;
        for t in targets {
            validate_target(t)?;
        }
        let p = cfg.modulation;
        let segment = match targets.first() {
            Some(t) => cfg
                .schedule
                .segment_of(t.angle_deg.to_radians())
                .ok_or_else(|| {
                    invalid(format!(
                        "target at {} deg outside every segment",
                        t.angle_deg
                    ))
                })?,
            None => 0,
        };
        let (lo, hi) = cfg.schedule.segment(segment);
        let center = 0.5 * (lo + hi);
        let bf = make_beamformers(center, hi - lo, &cfg.array)?;
        let w = bf.beam_response(center)?;
        let combiner = &w / Complex64::from(w.norm());
        let sample_period = cfg.link.sample_period();
        let frame_len = cfg.frame_len();
        let max_delay = frame_len as f64 * sample_period;
        for t in targets {
            if 2.0 * t.range_m / SPEED_OF_LIGHT >= max_delay {
                return Err(invalid(format!(
                    "target at {} m lies beyond the {}-sample frame",
                    t.range_m, frame_len
                )));
            }
        }
        // Unit-energy packets over K+1 samples radiate EIRP on boresight.
        let amplitude = (cfg.link.eirp_watts() * p.sequence_len() as f64
            / cfg.array.num_antennas() as f64)
            .sqrt();
        Ok(RadarSetup {
            cfg,
            encoder: HuffmanEncoder::new(p),
            cfar: cfg.cfar.build()?,
            bf,
            combiner,
            search: AngleSearch::new(lo, hi),
            segment,
            frame_len,
            sample_period,
            amplitude,
            noise_variance: cfg.link.noise_variance(),
            targets: targets.to_vec(),
        })
    }

    /// Noise variance giving `snr_db` at the correlation peak of the first
    /// target after combining.
    fn noise_for_post_correlation_snr(&self, snr_db: f64) -> Result<f64> {
        let t = self
            .targets
            .first()
            .ok_or_else(|| invalid("post-correlation SNR sweep needs a target"))?;
        let angle = t.angle_deg.to_radians();
        let rho2 = radar_gain(&self.cfg.link.with_range(t.range_m), t.rcs_dbsm)?;
        let beam = self.bf.beam_response(angle)?;
        let g = self.combiner.dotc(&beam) * self.bf.tx_gain(angle)?;
        let signal = rho2 * g.norm_sqr() * self.amplitude * self.amplitude;
        Ok(signal / 10f64.powf(snr_db / 10.0))
    }

    fn radar_targets<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<RadarTarget>> {
        self.targets
            .iter()
            .map(|t| {
                RadarTarget::from_physical(
                    &self.cfg.link,
                    t.range_m,
                    t.velocity_mps,
                    t.angle_deg.to_radians(),
                    t.rcs_dbsm,
                    rng.random::<f64>() * 2.0 * PI,
                )
            })
            .collect()
    }

    fn trial(&self, point: usize, trial: usize, noise_variance: f64) -> Result<TrialOutcome> {
        let cfg = self.cfg;
        let k = cfg.modulation.k();
        let frames = cfg.schedule.frames_per_cpi;
        let n = self.frame_len;
        let nrf = self.bf.num_rf_chains();
        let mut rng = stream_rng(cfg.seed, trial_stream(point, trial));
        let targets = self.radar_targets(&mut rng)?;

        let mut profiles: Vec<CorrelationProfile> = Vec::with_capacity(frames);
        let mut times = Vec::with_capacity(frames);
        let mut cov = DMatrix::<Complex64>::zeros(nrf, nrf);
        for f in 0..frames {
            let m = BitMessage::random(k, &mut rng);
            let x = self.encoder.encode(&m)?;
            let mut frame: Vec<Complex64> =
                x.samples().iter().map(|v| v * self.amplitude).collect();
            frame.resize(n, Complex64::new(0.0, 0.0));
            let t0 = cfg
                .schedule
                .frame_start(k, self.sample_period, self.segment, f);
            let mut y = apply_radar_channel(&frame, &targets, &self.bf, self.sample_period, t0)?;
            awgn(y.as_mut_slice(), noise_variance, &mut rng)?;
            cov += &y * y.adjoint();
            let combined: Vec<Complex64> = (0..n)
                .map(|col| self.combiner.dotc(&y.column(col)))
                .collect();
            profiles.push(Correlator::new(x.samples(), n)?.correlate(&combined)?);
            times.push(t0);
        }
        let cov = cov / Complex64::from((frames * n) as f64);

        let detections = os_cfar(&profiles[0], &self.cfar)?;
        let peaks = detections.local_peaks(2, n);
        let circ = |a: usize, b: usize| {
            let d = a.abs_diff(b);
            d.min(n - d)
        };
        let mut used = vec![false; peaks.len()];
        let mut matched = Vec::with_capacity(self.targets.len());
        for t in &targets {
            let cell = (t.delay / self.sample_period).round() as usize % n;
            let hit = peaks
                .iter()
                .enumerate()
                .filter(|(i, d)| !used[*i] && circ(d.cell, cell) <= 1)
                .min_by_key(|(_, d)| circ(d.cell, cell))
                .map(|(i, _)| i);
            if let Some(i) = hit {
                used[i] = true;
            }
            matched.push(hit);
        }
        let false_alarms = used.iter().filter(|u| !**u).count() as u64;

        let detected = matched.iter().filter(|m| m.is_some()).count();
        let q = detected.min(nrf - 1);
        let angles = if q > 0 {
            music_angles(&cov, &self.bf.rx_matrix, q, &self.search)?
        } else {
            Vec::new()
        };

        let fc = cfg.link.carrier_freq_hz;
        let mut errors = Vec::with_capacity(targets.len());
        for ((t, spec), hit) in targets.iter().zip(&self.targets).zip(&matched) {
            let Some(i) = hit else {
                errors.push(None);
                continue;
            };
            let cell = profiles[0].refine_peak(peaks[*i].cell, 1);
            let delay = estimate_delay(&profiles[0], cell, self.sample_period)?;
            let phases: Vec<f64> = profiles
                .iter()
                .map(|p| p.values()[p.refine_peak(cell, 1)].arg())
                .collect();
            let doppler = if frames >= 2 {
                estimate_doppler(&phases, &times)?
            } else {
                0.0
            };
            let range = SPEED_OF_LIGHT * delay / 2.0;
            let velocity = SPEED_OF_LIGHT * doppler / (2.0 * fc);
            let angle_err = angles
                .iter()
                .map(|a| a - t.angle)
                .min_by(|a, b| a.abs().total_cmp(&b.abs()))
                .map(|e| e.to_degrees())
                .unwrap_or(f64::NAN);
            errors.push(Some(TargetErrors {
                range: range - spec.range_m,
                velocity: velocity - spec.velocity_mps,
                angle_deg: angle_err,
            }));
        }
        Ok(TrialOutcome {
            errors,
            false_alarms,
        })
    }

    fn run_point(&self, point: usize, sweep: f64, noise_variance: f64) -> Result<RadarPoint> {
        let outcomes: Vec<TrialOutcome> = (0..self.cfg.trials)
            .into_par_iter()
            .map(|t| self.trial(point, t, noise_variance))
            .collect::<Result<_>>()?;
        let (mut se_r, mut se_v, mut se_a) = (0.0, 0.0, 0.0);
        let (mut detections, mut angle_count, mut false_alarms) = (0u64, 0u64, 0u64);
        for o in &outcomes {
            false_alarms += o.false_alarms;
            for e in o.errors.iter().flatten() {
                detections += 1;
                se_r += e.range * e.range;
                se_v += e.velocity * e.velocity;
                if e.angle_deg.is_finite() {
                    se_a += e.angle_deg * e.angle_deg;
                    angle_count += 1;
                }
            }
        }
        let trials = self.cfg.trials as u64;
        let target_trials = trials * self.targets.len() as u64;
        let cells = trials * self.frame_len as u64;
        let rms = |s: f64, n: u64| {
            if n == 0 {
                f64::NAN
            } else {
                (s / n as f64).sqrt()
            }
        };
        Ok(RadarPoint {
            sweep,
            noise_variance,
            trials,
            targets: self.targets.len() as u64,
            detections,
            detection_rate: if target_trials == 0 {
                0.0
            } else {
                detections as f64 / target_trials as f64
            },
            rmse_range_m: rms(se_r, detections),
            rmse_velocity_mps: rms(se_v, detections),
            rmse_angle_deg: rms(se_a, angle_count),
            false_alarms,
            cells,
            false_alarm_rate: false_alarms as f64 / cells as f64,
        })
    }
}

/// Radar chain over the configured CPI: OS-CFAR on the first frame, then
/// parabolic delay, multi-frame Doppler and beam-domain MUSIC per detected
/// target. With [`RadarNoise::LinkBudget`] this yields one point; with
/// [`RadarNoise::PostCorrelationSnr`] one point per `snr_grid_db` entry.
pub fn run_radar(cfg: &SimConfig, targets: &[TargetSpec]) -> Result<RadarResult> {
    let setup = RadarSetup::new(cfg, targets)?;
    let k = cfg.modulation.k();
    match cfg.radar_noise {
        RadarNoise::LinkBudget => Ok(RadarResult {
            k,
            sweep_kind: SweepKind::LinkBudget,
            points: vec![setup.run_point(0, 0.0, setup.noise_variance)?],
        }),
        RadarNoise::PostCorrelationSnr => {
            let points = cfg
                .snr_grid_db
                .iter()
                .enumerate()
                .map(|(i, &snr)| {
                    let var = setup.noise_for_post_correlation_snr(snr)?;
                    setup.run_point(i, snr, var)
                })
                .collect::<Result<_>>()?;
            Ok(RadarResult {
                k,
                sweep_kind: SweepKind::SnrDb,
                points,
            })
        }
    }
}

/// Moves a single target through `ranges_m` with link-budget noise.
pub fn run_radar_range_sweep(
    cfg: &SimConfig,
    target: &TargetSpec,
    ranges_m: &[f64],
) -> Result<RadarResult> {
    let points = ranges_m
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let t = TargetSpec {
                range_m: r,
                ..*target
            };
            let setup = RadarSetup::new(cfg, &[t])?;
            setup.run_point(i, r, setup.noise_variance)
        })
        .collect::<Result<_>>()?;
    Ok(RadarResult {
        k: cfg.modulation.k(),
        sweep_kind: SweepKind::RangeM,
        points,
    })
}

/// Noise-only OS-CFAR run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfarCalibration {
    pub pfa: f64,
    pub alpha: f64,
    pub cells: u64,
    pub false_alarms: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl CfarCalibration {
    pub const CSV_HEADER: &'static str = "pfa,alpha,cells,false_alarms,rate,ci_low,ci_high";

    pub fn to_csv(&self) -> String {
        format!(
            "{}\n{:e},{},{},{},{:e},{:e},{:e}\n",
            Self::CSV_HEADER,
            self.pfa,
            self.alpha,
            self.cells,
            self.false_alarms,
            self.rate,
            self.ci_low,
            self.ci_high
        )
    }
}

/// Wilson score interval for `successes` out of `trials` at 95 %.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Empirical false-alarm rate of the configured OS-CFAR on `cfg.trials`
/// noise-only frames correlated against fresh Huffman references.
pub fn run_cfar_calibration(cfg: &SimConfig) -> Result<CfarCalibration> {
    cfg.validate()?;
    run_cfar_calibration_with(cfg, &cfg.cfar.build()?)
}

/// [`run_cfar_calibration`] with an explicit detector (e.g. a scaled alpha).
pub fn run_cfar_calibration_with(cfg: &SimConfig, cfar: &CfarConfig) -> Result<CfarCalibration> {
    let n = cfg.frame_len();
    let cells = (cfg.trials * n) as u64;
    let needed = (100.0 / cfar.pfa).ceil();
    if (cells as f64) < needed {
        return Err(invalid(format!(
            "calibration at pfa {} needs at least {needed} cells (100/pfa), got {cells}",
            cfar.pfa
        )));
    }
    let p = cfg.modulation;
    let encoder = HuffmanEncoder::new(p);
    let counts: Vec<u64> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream_rng(cfg.seed, trial_stream(0, trial));
            let m = BitMessage::random(p.k(), &mut rng);
            let x = encoder.encode(&m)?;
            let mut frame = vec![Complex64::new(0.0, 0.0); n];
            awgn(&mut frame, 1.0, &mut rng)?;
            let profile = Correlator::new(x.samples(), n)?.correlate(&frame)?;
            Ok(os_cfar_count(&profile.power(), cfar)? as u64)
        })
        .collect::<Result<_>>()?;
    let false_alarms: u64 = counts.iter().sum();
    let (ci_low, ci_high) = wilson_interval(false_alarms, cells);
    Ok(CfarCalibration {
        pfa: cfar.pfa,
        alpha: cfar.alpha,
        cells,
        false_alarms,
        rate: false_alarms as f64 / cells as f64,
        ci_low,
        ci_high,
    })
}
