use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bmocz::dizet::DizetDecoder;
use bmocz::huffman::{
    autocorrelation, BitMessage, HuffmanEncoder, ModulationParams, DEFAULT_LAMBDA,
};
use bmocz::io::{format_sequence_csv, parse_bits, parse_sequence_csv, parse_sim_config};
use bmocz::radar::ambiguity_function;
use bmocz::sim::{run_ber, run_cfar_calibration, run_radar, stream_rng, SimConfig};
use bmocz::Error;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "moczsim",
    version,
    about = "Huffman-sequence BMOCZ waveform and radar simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a bit string into a Huffman sequence (CSV `re,im` rows).
    Encode(MessageArgs),
    /// Decode a received sequence CSV (file or stdin) with DiZeT.
    Decode {
        input: Option<PathBuf>,
        /// Bits per packet; defaults to the sequence length minus one.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
    },
    /// Aperiodic autocorrelation as `lag,re,im` rows.
    Autocorr(MessageArgs),
    /// Ambiguity-function magnitude as a gnuplot `splot` grid.
    Af {
        #[command(flatten)]
        message: MessageArgs,
        #[arg(long, default_value_t = 64)]
        doppler_bins: usize,
    },
    /// BER sweep; writes ber.csv and ber_summary.json.
    Ber(SimArgs),
    /// Radar estimation sweep; writes radar.csv and radar_summary.json.
    Radar(SimArgs),
    /// Noise-only OS-CFAR false-alarm run; writes cfar_calibration.json.
    CalibrateCfar(SimArgs),
}

#[derive(Args)]
struct MessageArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    /// `0b…`/plain binary or `0x…` hex; random (from --seed) when omitted.
    #[arg(long)]
    bits: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the output file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr_db: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 3,
        Error::Invariant(_) | Error::NoBracket(_) => 4,
        _ => 2,
    }
}

fn write_atomic(path: &Path, contents: &str) -> bmocz::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, name: &str, contents: &str) -> bmocz::Result<()> {
    match out {
        Some(dir) => write_atomic(&dir.join(name), contents),
        None => {
            io::stdout().write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

fn message(args: &MessageArgs) -> bmocz::Result<(ModulationParams, BitMessage)> {
    let p = ModulationParams::new(args.k, args.lambda)?;
    let m = match &args.bits {
        Some(s) => parse_bits(s, args.k)?,
        None => BitMessage::random(args.k, &mut stream_rng(args.seed, 0)),
    };
    Ok((p, m))
}

fn encoded(args: &MessageArgs) -> bmocz::Result<Vec<bmocz::Complex64>> {
    let (p, m) = message(args)?;
    let x = HuffmanEncoder::new(p).encode(&m)?;
    let energy = x.energy();
    if (energy - 1.0).abs() > 1e-9 {
        return Err(Error::Invariant(format!(
            "sequence energy {energy} is not 1"
        )));
    }
    Ok(x.into_samples())
}

fn sim_config(args: &SimArgs) -> bmocz::Result<SimConfig> {
    let mut cfg = match &args.config {
        Some(path) => parse_sim_config(&fs::read_to_string(path)?)?,
        None => SimConfig::new(ModulationParams::new(127, DEFAULT_LAMBDA)?),
    };
    if args.k.is_some() || args.lambda.is_some() {
        let k = args.k.unwrap_or(cfg.modulation.k());
        let lambda = args.lambda.unwrap_or(cfg.modulation.lambda());
        cfg.modulation = ModulationParams::new(k, lambda)?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(grid) = &args.snr_db {
        cfg.snr_grid_db = grid.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct Summary<'a, T> {
    config: &'a SimConfig,
    result: T,
}

fn summary<T: Serialize>(cfg: &SimConfig, result: T) -> bmocz::Result<String> {
    let mut s = serde_json::to_string_pretty(&Summary {
        config: cfg,
        result,
    })?;
    s.push('\n');
    Ok(s)
}

fn run(cli: Cli) -> bmocz::Result<()> {
    match cli.command {
        Command::Encode(args) => {
            let x = encoded(&args)?;
            emit(&args.out, "sequence.csv", &format_sequence_csv(&x))
        }
        Command::Decode { input, k, lambda } => {
            let text = match input {
                Some(path) => fs::read_to_string(path)?,
                None => {
                    let mut s = String::new();
                    io::stdin().read_to_string(&mut s)?;
                    s
                }
            };
            let y = parse_sequence_csv(&text)?;
            let k = match k {
                Some(k) => k,
                None => y.len().checked_sub(1).ok_or(Error::InsufficientLength {
                    needed: 2,
                    got: y.len(),
                })?,
            };
            let p = ModulationParams::new(k, lambda)?;
            let d = DizetDecoder::new(p, y.len())?.decode(&y)?;
            let json = serde_json::json!({
                "bits": d.message().to_string(),
                "margins": d.margins,
            });
            println!("{json}");
            Ok(())
        }
        Command::Autocorr(args) => {
            let x = encoded(&args)?;
            let a = autocorrelation(&x);
            let lag0 = a.max_lag() as isize;
            let mut out = String::from("lag,re,im\n");
            for (i, v) in a.coeffs().iter().enumerate() {
                out.push_str(&format!("{},{:?},{:?}\n", i as isize - lag0, v.re, v.im));
            }
            emit(&args.out, "autocorr.csv", &out)
        }
        Command::Af {
            message,
            doppler_bins,
        } => {
            let x = encoded(&message)?;
            let af = ambiguity_function(&x, x.len() - 1, doppler_bins)?;
            let mut out = String::from("# lag doppler_bin magnitude\n");
            for lag in af.lags() {
                for d in af.doppler_indices() {
                    out.push_str(&format!("{lag} {d} {:e}\n", af.get(lag, d)));
                }
                out.push('\n');
            }
            emit(&message.out, "af.dat", &out)
        }
        Command::Ber(args) => {
            let cfg = sim_config(&args)?;
            let res = run_ber(&cfg)?;
            write_atomic(&args.out.join("ber.csv"), &res.to_csv())?;
            write_atomic(&args.out.join("ber_summary.json"), &summary(&cfg, &res)?)
        }
        Command::Radar(args) => {
            let cfg = sim_config(&args)?;
            let res = run_radar(&cfg, &cfg.targets)?;
            write_atomic(&args.out.join("radar.csv"), &res.to_csv())?;
            write_atomic(&args.out.join("radar_summary.json"), &summary(&cfg, &res)?)
        }
        Command::CalibrateCfar(args) => {
            let cfg = sim_config(&args)?;
            let cal = run_cfar_calibration(&cfg)?;
            write_atomic(
                &args.out.join("cfar_calibration.json"),
                &summary(&cfg, cal)?,
            )
        }
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("MOCZSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("MOCZSIM_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_threads() {
        eprintln!("moczsim: {msg}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("moczsim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
