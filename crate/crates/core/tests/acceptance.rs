//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Tolerances and runtime limits are the
//! constants next to each check.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bmocz::array::{fractional_delay, make_beamformers, ArrayConfig};
use bmocz::dizet::DizetDecoder;
use bmocz::huffman::{BitMessage, HuffmanEncoder, ModulationParams};
use bmocz::radar::{
    ambiguity_function, cross_correlate, estimate_delay, estimate_doppler, music_angles,
    AngleSearch,
};
use bmocz::sim::{
    bpsk_ebn0_db_for, run_ber, run_cfar_calibration, run_radar, ChannelModel, RadarNoise,
    SimConfig, TargetSpec,
};
use bmocz::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn params(k: usize) -> ModulationParams {
    ModulationParams::new(k, 0.5).unwrap()
}

fn direct_autocorrelation(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len() as isize;
    (-(n - 1)..n)
        .map(|lag| {
            let mut acc = c(0.0, 0.0);
            for m in 0..n {
                let j = m - lag;
                if (0..n).contains(&j) {
                    acc += x[m as usize] * x[j as usize].conj();
                }
            }
            acc
        })
        .collect()
}

fn closed_form_ends(k: usize, r: f64, w: usize) -> (f64, f64) {
    let den = 1.0 + r.powi(2 * k as i32);
    (
        (r.powi(2 * w as i32) / den).sqrt(),
        -(r.powi(2 * (k - w) as i32) / den).sqrt(),
    )
}

fn huffman_errors(k: usize, x: &[Complex64], m: &BitMessage) -> f64 {
    let r = params(k).radius();
    let eta = 1.0 / (r.powi(k as i32) + r.powi(-(k as i32)));
    let a = direct_autocorrelation(x);
    let mut err: f64 = 0.0;
    for (i, v) in a.iter().enumerate() {
        let want = if i == k {
            1.0
        } else if i == 0 || i == 2 * k {
            -eta
        } else {
            0.0
        };
        err = err.max((v - c(want, 0.0)).norm());
    }
    let (x0, xk) = closed_form_ends(k, r, m.weight());
    err = err.max((x[0] - c(x0, 0.0)).norm());
    err = err.max((x[k] - c(xk, 0.0)).norm());
    let energy: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    err.max((energy - 1.0).abs())
}

fn criterion_1() -> Outcome {
    const TOL: f64 = 1e-9;
    let mut worst: f64 = 0.0;
    for k in 2..=10usize {
        let enc = HuffmanEncoder::new(params(k));
        for idx in 0..(1u64 << k) {
            let m = BitMessage::from_index(idx, k);
            let x = enc.encode(&m).unwrap();
            worst = worst.max(huffman_errors(k, x.samples(), &m));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in [31usize, 127, 511] {
        let enc = HuffmanEncoder::new(params(k));
        for _ in 0..1000 {
            let m = BitMessage::random(k, &mut rng);
            let x = enc.encode(&m).unwrap();
            worst = worst.max(huffman_errors(k, x.samples(), &m));
        }
    }
    Outcome {
        pass: worst <= TOL,
        detail: format!("max deviation {worst:.2e} (tol {TOL:.0e})"),
    }
}

fn criterion_2() -> Outcome {
    const WANT: f64 = 0.2001;
    const TOL: f64 = 1e-3;
    let k = 511;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = HuffmanEncoder::new(params(k))
        .encode(&BitMessage::random(k, &mut rng))
        .unwrap();
    let af = ambiguity_function(x.samples(), k, 64).unwrap();
    let psl = af.peak_sidelobe_level();
    Outcome {
        pass: (psl - WANT).abs() <= TOL,
        detail: format!("PSL {psl:.5} (want {WANT} ± {TOL:.0e})"),
    }
}

/// Monic polynomial through `roots`, scaled by `gain`.
fn poly_from_roots(roots: &[Complex64], gain: Complex64) -> Vec<Complex64> {
    let mut p = vec![gain];
    for r in roots {
        let mut next = vec![c(0.0, 0.0); p.len() + 1];
        for (i, v) in p.iter().enumerate() {
            next[i + 1] += v;
            next[i] -= v * r;
        }
        p = next;
    }
    p
}

fn convolve(h: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![c(0.0, 0.0); h.len() + x.len() - 1];
    for (i, a) in h.iter().enumerate() {
        for (j, b) in x.iter().enumerate() {
            y[i + j] += a * b;
        }
    }
    y
}

fn criterion_3() -> Outcome {
    const CHANNELS: usize = 10_000;
    const MAX_TAPS: usize = 8;
    const MIN_ROOT_DISTANCE: f64 = 1e-3;
    let k = 31;
    let p = params(k);
    let r = p.radius();
    let enc = HuffmanEncoder::new(p);
    let decoders: Vec<DizetDecoder> = (1..=MAX_TAPS)
        .map(|l| DizetDecoder::new(p, k + l).unwrap())
        .collect();
    let test_points: Vec<Complex64> = (0..k)
        .flat_map(|j| {
            let d = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64);
            [d * r, d / r]
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut errors = 0usize;
    for _ in 0..CHANNELS {
        let taps = rng.random_range(1..=MAX_TAPS);
        let mut roots = Vec::with_capacity(taps - 1);
        while roots.len() < taps - 1 {
            let z =
                Complex64::from_polar(rng.random_range(0.3..2.0), rng.random_range(0.0..2.0 * PI));
            if test_points
                .iter()
                .all(|t| (t - z).norm() >= MIN_ROOT_DISTANCE)
            {
                roots.push(z);
            }
        }
        let gain =
            Complex64::from_polar(rng.random_range(0.1..3.0), rng.random_range(0.0..2.0 * PI));
        let h = poly_from_roots(&roots, gain);
        let m = BitMessage::random(k, &mut rng);
        let y = convolve(&h, enc.encode(&m).unwrap().samples());
        errors += decoders[taps - 1].decode(&y).unwrap().bit_errors(&m);
    }
    Outcome {
        pass: errors == 0,
        detail: format!("{errors} bit errors over {CHANNELS} channels (want 0)"),
    }
}

fn ber_config(model: ChannelModel, grid: Vec<f64>, trials: usize) -> SimConfig {
    let mut cfg = SimConfig::new(params(127));
    cfg.channel_model = model;
    cfg.snr_grid_db = grid;
    cfg.trials = trials;
    cfg.seed = 4;
    cfg
}

fn criterion_4() -> Outcome {
    const PACKETS: usize = 200_000;
    const GAP_DB: f64 = 4.0;
    const TARGET_BER: f64 = 1e-3;
    let at = bpsk_ebn0_db_for(TARGET_BER) + GAP_DB;
    let awgn_gap = run_ber(&ber_config(ChannelModel::Awgn, vec![at], PACKETS)).unwrap();
    let gap_ber = awgn_gap.points[0].ber;

    let grid = vec![5.0, 7.5, 10.0];
    let awgn = run_ber(&ber_config(ChannelModel::Awgn, grid.clone(), PACKETS)).unwrap();
    let mut ordered = true;
    let mut worst = String::new();
    for model in [ChannelModel::RayleighFlat, ChannelModel::RicianSelective] {
        let faded = run_ber(&ber_config(model, grid.clone(), PACKETS)).unwrap();
        for (a, f) in awgn.points.iter().zip(&faded.points) {
            if f.ber < a.ber {
                ordered = false;
                worst = format!(
                    "; {model:?} {:.3e} < AWGN {:.3e} at {} dB",
                    f.ber, a.ber, a.snr_db
                );
            }
        }
    }
    Outcome {
        pass: gap_ber <= TARGET_BER && ordered,
        detail: format!(
            "AWGN BER {gap_ber:.3e} at {at:.2} dB = BPSK(1e-3) + {GAP_DB} dB over {PACKETS} packets; fading ≥ AWGN on {grid:?} dB: {ordered}{worst}"
        ),
    }
}

fn criterion_5() -> Outcome {
    const PFA: f64 = 1e-4;
    const MIN_CELLS: u64 = 10_000_000;
    const LO: f64 = 0.3e-4;
    const HI: f64 = 3e-4;
    let mut cfg = SimConfig::new(params(511));
    cfg.cfar.pfa = PFA;
    cfg.seed = 5;
    cfg.trials = (MIN_CELLS as usize).div_ceil(cfg.frame_len());
    let cal = run_cfar_calibration(&cfg).unwrap();
    Outcome {
        pass: cal.cells >= MIN_CELLS && cal.rate >= LO && cal.rate <= HI,
        detail: format!(
            "rate {:.3e} [{:.2e}, {:.2e}] over {} cells (want [{LO:.1e}, {HI:.1e}])",
            cal.rate, cal.ci_low, cal.ci_high, cal.cells
        ),
    }
}

fn criterion_6_noiseless() -> Outcome {
    const TOL_CELLS: f64 = 0.05;
    let k = 511;
    let n = 1024;
    let t = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = HuffmanEncoder::new(params(k))
        .encode(&BitMessage::random(k, &mut rng))
        .unwrap()
        .into_samples();
    let mut frame = x.clone();
    frame.resize(n, c(0.0, 0.0));
    let base = 40.0;
    let mut worst: (f64, f64) = (0.0, 0.0);
    for i in 1..=9 {
        let d = 0.1 * i as f64;
        let y = fractional_delay(&frame, base + d);
        let prof = cross_correlate(&x, &y).unwrap();
        let cell = prof.peak_cell().unwrap();
        let err = (estimate_delay(&prof, cell, t).unwrap() / t - (base + d)).abs();
        if err > worst.1 {
            worst = (d, err);
        }
    }
    Outcome {
        pass: worst.1 <= TOL_CELLS,
        detail: format!(
            "noiseless: worst error {:.4} T at delay {:.1} T (tol {TOL_CELLS} T)",
            worst.1, worst.0
        ),
    }
}

fn radar_config(seed: u64, trials: usize, snr_db: f64) -> SimConfig {
    let mut cfg = SimConfig::new(params(511));
    cfg.radar_noise = RadarNoise::PostCorrelationSnr;
    cfg.snr_grid_db = vec![snr_db];
    cfg.trials = trials;
    cfg.seed = seed;
    cfg
}

fn criterion_6_noisy() -> Outcome {
    const TRIALS: usize = 1000;
    const SNR_DB: f64 = 20.0;
    const MAX_RMSE_M: f64 = 1.499;
    let target = TargetSpec {
        range_m: 37.3,
        velocity_mps: 4.0,
        angle_deg: 1.3,
        rcs_dbsm: 10.0,
    };
    let res = run_radar(&radar_config(61, TRIALS, SNR_DB), &[target]).unwrap();
    let p = res.points[0];
    Outcome {
        pass: p.detections > 0 && p.rmse_range_m <= MAX_RMSE_M,
        detail: format!(
            "{SNR_DB} dB: range RMSE {:.3} m over {} detections / {TRIALS} trials (limit {MAX_RMSE_M} m)",
            p.rmse_range_m, p.detections
        ),
    }
}

fn criterion_7() -> Outcome {
    const NOISELESS_TOL_HZ: f64 = 1e-6;
    const SIGMA: f64 = 0.1;
    const TRIALS: usize = 4000;
    const RATIO_LO: f64 = 0.5;
    const RATIO_HI: f64 = 2.0;
    let nu = 100.0;
    let times: Vec<f64> = (0..16).map(|i| i as f64 * 1e-3).collect();
    let wrap = |p: f64| (p + PI).rem_euclid(2.0 * PI) - PI;
    let clean: Vec<f64> = times
        .iter()
        .map(|t| wrap(0.4 + 2.0 * PI * nu * t))
        .collect();
    let noiseless_err = (estimate_doppler(&clean, &times).unwrap() - nu).abs();

    let mean_t = times.iter().sum::<f64>() / times.len() as f64;
    let sxx: f64 = times.iter().map(|t| (t - mean_t).powi(2)).sum();
    let theory = SIGMA * SIGMA / sxx / (2.0 * PI).powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let normal = rand_distr::Normal::new(0.0, SIGMA).unwrap();
    let mse = (0..TRIALS)
        .map(|_| {
            let phases: Vec<f64> = clean.iter().map(|p| wrap(p + rng.sample(normal))).collect();
            (estimate_doppler(&phases, &times).unwrap() - nu).powi(2)
        })
        .sum::<f64>()
        / TRIALS as f64;
    let ratio = mse / theory;
    Outcome {
        pass: noiseless_err < NOISELESS_TOL_HZ && (RATIO_LO..=RATIO_HI).contains(&ratio),
        detail: format!(
            "noiseless error {noiseless_err:.2e} Hz (tol {NOISELESS_TOL_HZ:.0e}); MSE/LS-variance {ratio:.3} (want [{RATIO_LO}, {RATIO_HI}])"
        ),
    }
}

fn criterion_8() -> Outcome {
    const TRIALS: usize = 500;
    const SNR_DB: f64 = 20.0;
    const MAX_RMSE_DEG: f64 = 1.0;
    const ON_GRID_TOL_DEG: f64 = 1e-6;
    let target = TargetSpec {
        range_m: 52.0,
        velocity_mps: -3.0,
        angle_deg: -1.7,
        rcs_dbsm: 10.0,
    };
    let res = run_radar(&radar_config(8, TRIALS, SNR_DB), &[target]).unwrap();
    let p = res.points[0];

    let cfg = ArrayConfig::new(64, 4).unwrap();
    let search = AngleSearch::new((-4f64).to_radians(), 4f64.to_radians());
    let grid_tol = ON_GRID_TOL_DEG.to_radians();
    let bf = make_beamformers(0.0, 8f64.to_radians(), &cfg).unwrap();
    let truth = search.grid()[7];
    let b = bf.beam_response(truth).unwrap();
    let est = music_angles(&(&b * b.adjoint()), &bf.rx_matrix, 1, &search).unwrap();
    let grid_err = (est[0] - truth).abs();
    Outcome {
        pass: p.detections > 0 && p.rmse_angle_deg < MAX_RMSE_DEG && grid_err <= grid_tol,
        detail: format!(
            "{SNR_DB} dB: angle RMSE {:.4}° over {} detections (limit {MAX_RMSE_DEG}°); noiseless on-grid error {:.2e}° (tol {:.0e}°)",
            p.rmse_angle_deg,
            p.detections,
            grid_err.to_degrees(),
            grid_tol.to_degrees()
        ),
    }
}

fn criterion_9() -> Outcome {
    const XCORR_TOL: f64 = 1e-9;
    const ENERGY_TOL: f64 = 1e-12;
    const HORNER_TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    let mut xcorr: f64 = 0.0;
    for n in [1usize, 2, 7, 64, 100, 256] {
        for _ in 0..5 {
            let lx = rng.random_range(1..=n);
            let x: Vec<Complex64> = (0..lx)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let y: Vec<Complex64> = (0..n)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let fast = cross_correlate(&x, &y).unwrap();
            let scale = fast
                .values()
                .iter()
                .map(|v| v.norm())
                .fold(1e-300, f64::max);
            for lag in 0..n {
                let mut direct = c(0.0, 0.0);
                for (m, xv) in x.iter().enumerate() {
                    direct += xv.conj() * y[(m + lag) % n];
                }
                xcorr = xcorr.max((fast.values()[lag] - direct).norm() / scale);
            }
        }
    }

    let mut energy: f64 = 0.0;
    for k in 2..=10usize {
        let p = params(k);
        let enc = HuffmanEncoder::new(p);
        let mean = (0..(1u64 << k))
            .map(|i| enc.encode(&BitMessage::from_index(i, k)).unwrap().samples()[0].norm_sqr())
            .sum::<f64>()
            / (1u64 << k) as f64;
        let r2 = p.radius() * p.radius();
        let binomial = (1.0 + r2).powi(k as i32) / 2f64.powi(k as i32) / (1.0 + r2.powi(k as i32));
        energy = energy.max((mean - binomial).abs());
    }

    let mut horner: f64 = 0.0;
    for k in [2usize, 7, 31, 127] {
        let p = params(k);
        for extra in [0usize, 3] {
            let dec = DizetDecoder::new(p, k + 1 + extra).unwrap();
            let y: Vec<Complex64> = (0..k + 1 + extra)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let fast = dec.decode(&y).unwrap();
            let slow = dec.decode_horner(&y).unwrap();
            for (a, b) in fast.margins.iter().zip(&slow.margins) {
                horner = horner.max((a - b).abs());
            }
            if fast.bits != slow.bits {
                horner = f64::INFINITY;
            }
        }
    }
    Outcome {
        pass: xcorr <= XCORR_TOL && energy <= ENERGY_TOL && horner <= HORNER_TOL,
        detail: format!(
            "xcorr rel {xcorr:.2e} (tol {XCORR_TOL:.0e}); E|x0|² {energy:.2e} (tol {ENERGY_TOL:.0e}); fast vs Horner margins {horner:.2e} (tol {HORNER_TOL:.0e})"
        ),
    }
}

type Check = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(&str, &str, Check, Duration); 10] = [
        (
            "1",
            "Huffman invariant suite",
            criterion_1,
            Duration::from_secs(30),
        ),
        ("2", "PSL equals eta", criterion_2, Duration::from_secs(5)),
        (
            "3",
            "noiseless multipath decode",
            criterion_3,
            Duration::from_secs(60),
        ),
        (
            "4",
            "BER gap and fading order",
            criterion_4,
            Duration::from_secs(600),
        ),
        (
            "5",
            "OS-CFAR calibration",
            criterion_5,
            Duration::from_secs(300),
        ),
        (
            "6a",
            "fractional delay",
            criterion_6_noiseless,
            Duration::from_secs(300),
        ),
        (
            "6b",
            "range RMSE",
            criterion_6_noisy,
            Duration::from_secs(300),
        ),
        (
            "7",
            "Doppler estimation",
            criterion_7,
            Duration::from_secs(60),
        ),
        ("8", "MUSIC angle", criterion_8, Duration::from_secs(120)),
        (
            "9",
            "oracle equivalences",
            criterion_9,
            Duration::from_secs(60),
        ),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (id, name, check, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ),
        });
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= limit;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:<2} {} {name}: {}; {:.1} s (limit {} s)",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
