//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for I/O errors
//! and 4 for divergence or other numeric failures.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::aecsim::{run_comparison_with, ComparisonReport, SimulationConfig};
use crate::analysis::{band_average_coherence, coherence, CoherenceSpectrum};
use crate::buffer::AudioBuffer;
use crate::decorrelators::response::write_response_csv;
use crate::decorrelators::{
    scal_transfer, AllpassBaselineConfig, AllpassMode, CombAllpassConfig, DecorrelatorConfig, ScalConfig,
    SmoothedAbsConfig,
};
use crate::error::{Error, Result};
use crate::psynoise::{write_threshold_csv, NoiseInjectorConfig};
use crate::wav::{read_wav, write_atomic, write_wav, WavFile};
use crate::windows::WindowSpec;

/// Environment variable holding the default master seed.
pub const SEED_ENV: &str = "STEREO_DECORR_SEED";

#[derive(Debug, Parser)]
#[command(name = "stereo-decorr", version, about = "Stereo channel decorrelation for echo cancellation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decorrelate a mono or stereo WAV file.
    Process(ProcessArgs),
    /// Inter-channel coherence of a stereo WAV file.
    Analyze(AnalyzeArgs),
    /// Run an echo-cancellation simulation described by a JSON config.
    Simulate(SimulateArgs),
    /// Like `simulate`, and print a ranking of the algorithms.
    Compare(SimulateArgs),
    /// Print a built-in simulation config.
    Preset {
        #[arg(value_parser = ["mono_sanity", "desk_stereo", "full_scale", "long_room"])]
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Dump the frequency response of one SCAL filter.
    Response(ResponseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    None,
    Scal,
    CombAllpass,
    FirstOrderAllpass,
    SmoothedAbs,
    Noise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Flat,
    Literal,
}

impl From<Mode> for AllpassMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Flat => AllpassMode::Flat,
            Mode::Literal => AllpassMode::Literal,
        }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ProcessArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Scal)]
    pub method: Method,
    /// Full decorrelator config as JSON; overrides `--method` and its flags.
    #[arg(long, conflicts_with = "method")]
    pub config: Option<PathBuf>,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub nmin: Option<usize>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Comb-allpass order.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Window length in samples.
    #[arg(long)]
    pub window: Option<usize>,
    /// Add masked noise after the comb-allpass stage.
    #[arg(long)]
    pub noise: bool,
    #[arg(long)]
    pub noise_offset_db: Option<f64>,
    #[arg(long)]
    pub alpha_min: Option<f64>,
    #[arg(long)]
    pub alpha_abs: Option<f64>,
    /// Write the per-frame masking thresholds of channel 0 as CSV.
    #[arg(long)]
    pub threshold_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 1024)]
    pub fft: usize,
    /// Per-bin coherence CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Band summary JSON; printed to stdout when absent.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation config (JSON).
    #[arg(required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Output directory for `report.json` and `traces.csv`.
    #[arg(short, long, default_value = ".")]
    pub out: PathBuf,
    /// Also write far-end, processed and microphone signals as WAV.
    #[arg(long)]
    pub dump_wav: bool,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ResponseArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.43)]
    pub beta: f64,
    #[arg(long, default_value_t = 10)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = Mode::Flat)]
    pub mode: Mode,
    #[arg(long, default_value_t = 4096)]
    pub bins: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Process(a) => cmd_process(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Simulate(a) => cmd_simulate(&a, false),
        Command::Compare(a) => cmd_simulate(&a, true),
        Command::Preset { name, output } => {
            let cfg = SimulationConfig::preset(&name).ok_or_else(|| Error::config(format!("unknown preset {name}")))?;
            emit(output.as_deref(), serde_json::to_string_pretty(&cfg)? + "\n")
        }
        Command::Response(a) => cmd_response(&a),
    }
}

fn emit(path: Option<&Path>, text: String) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_json_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    Ok(serde_json::from_str(&text)?)
}

/// Flags that were given but have no meaning for `method`.
fn check_applicable(a: &ProcessArgs) -> Result<()> {
    use Method::*;
    let given: [(&str, bool, &[Method]); 12] = [
        ("beta", a.beta.is_some(), &[Scal]),
        ("nmin", a.nmin.is_some(), &[Scal]),
        ("nmax", a.nmax.is_some(), &[Scal]),
        ("order", a.order.is_some(), &[CombAllpass]),
        ("rmax", a.rmax.is_some(), &[Scal, CombAllpass]),
        ("epsilon", a.epsilon.is_some(), &[Scal, CombAllpass]),
        ("mode", a.mode.is_some(), &[Scal, CombAllpass]),
        ("window", a.window.is_some(), &[Scal, CombAllpass, Noise]),
        ("noise", a.noise, &[Scal, CombAllpass]),
        ("noise-offset-db", a.noise_offset_db.is_some(), &[Scal, CombAllpass, Noise]),
        ("alpha-min", a.alpha_min.is_some(), &[FirstOrderAllpass]),
        ("alpha-abs", a.alpha_abs.is_some(), &[SmoothedAbs]),
    ];
    for (flag, set, methods) in given {
        if set && !methods.contains(&a.method) {
            let name = a.method.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default();
            return Err(Error::config(format!("--{flag} does not apply to --method {name}")));
        }
    }
    Ok(())
}

/// Turns the `process` flags into a decorrelator config.
pub fn decorrelator_from_args(a: &ProcessArgs) -> Result<DecorrelatorConfig> {
    if let Some(path) = &a.config {
        return read_json_file(path);
    }
    let window = a.window.map(|length| WindowSpec { length, ..WindowSpec::default() });
    let noise = {
        let mut n = NoiseInjectorConfig::default();
        if let Some(w) = window {
            n.window = w;
        }
        if let Some(o) = a.noise_offset_db {
            n.threshold_offset_db = o;
        }
        n
    };
    check_applicable(a)?;
    let cfg = match a.method {
        Method::None => DecorrelatorConfig::None,
        Method::Scal => {
            let d = ScalConfig::default();
            let scal = ScalConfig {
                beta: a.beta.unwrap_or(d.beta),
                n_min: a.nmin.unwrap_or(d.n_min),
                n_max: a.nmax.unwrap_or(d.n_max),
                r_max: a.rmax.unwrap_or(d.r_max),
                epsilon: a.epsilon.unwrap_or(d.epsilon),
                mode: a.mode.map_or(d.mode, Into::into),
                window: window.unwrap_or(d.window),
                ..d
            };
            DecorrelatorConfig::Scal { scal, noise: a.noise.then_some(noise) }
        }
        Method::CombAllpass => {
            let d = CombAllpassConfig::default();
            let comb = CombAllpassConfig {
                order: a.order.unwrap_or(d.order),
                r_max: a.rmax.unwrap_or(d.r_max),
                epsilon: a.epsilon.unwrap_or(d.epsilon),
                mode: a.mode.map_or(d.mode, Into::into),
                window: window.unwrap_or(d.window),
                ..d
            };
            DecorrelatorConfig::CombAllpass { comb, noise: a.noise.then_some(noise) }
        }
        Method::FirstOrderAllpass => {
            let d = AllpassBaselineConfig::default();
            DecorrelatorConfig::FirstOrderAllpass {
                allpass: AllpassBaselineConfig { alpha_min: a.alpha_min.unwrap_or(d.alpha_min), ..d },
            }
        }
        Method::SmoothedAbs => {
            let d = SmoothedAbsConfig::default();
            DecorrelatorConfig::SmoothedAbs {
                smoothed: SmoothedAbsConfig { alpha_abs: a.alpha_abs.unwrap_or(d.alpha_abs), ..d },
            }
        }
        Method::Noise => DecorrelatorConfig::Noise { noise },
    };
    Ok(cfg)
}

fn check_format(wav: &WavFile) -> Result<()> {
    if !(1..=2).contains(&wav.channels()) {
        return Err(Error::UnsupportedFormat(format!("{} channels; only mono and stereo are supported", wav.channels())));
    }
    if !(8000..=48000).contains(&wav.sample_rate()) {
        return Err(Error::UnsupportedFormat(format!("sample rate {} Hz is outside 8000..=48000", wav.sample_rate())));
    }
    Ok(())
}

pub fn cmd_process(a: &ProcessArgs) -> Result<()> {
    let cfg = decorrelator_from_args(a)?;
    cfg.validate(48000)?;
    let wav = read_wav(&a.input)?;
    check_format(&wav)?;
    let sr = wav.sample_rate();
    cfg.validate(sr)?;

    let mut records = None;
    let channels = wav
        .audio
        .channels()
        .iter()
        .enumerate()
        .map(|(i, ch)| {
            let (mut first, noise) = cfg.build_parts(sr, a.seed, i)?;
            let mut out = vec![0.0; ch.len()];
            first.process(ch, &mut out)?;
            if let Some(noise) = noise {
                let mut noise = if i == 0 && a.threshold_csv.is_some() { noise.with_recording() } else { noise };
                let staged = out.clone();
                crate::decorrelators::Decorrelator::process(&mut noise, &staged, &mut out)?;
                if i == 0 {
                    records = noise.records().map(<[_]>::to_vec);
                }
            }
            if out.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("channel {i} output")));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some(path) = &a.threshold_csv {
        let records = records.ok_or_else(|| Error::config("--threshold-csv needs a method with noise injection"))?;
        let mut buf = Vec::new();
        write_threshold_csv(&mut buf, &records).map_err(|source| Error::Io { path: path.clone(), source })?;
        write_atomic(path, &buf)?;
    }
    write_wav(&a.output, &AudioBuffer::new(channels, sr)?, wav.bit_depth)
}

#[derive(Debug, Serialize)]
pub struct BandSummary {
    pub sample_rate: u32,
    pub fft_size: usize,
    pub n_blocks_averaged: usize,
    pub full: f64,
    pub low_0_1500: f64,
    pub mid_1500_2000: f64,
    pub high_2000_nyquist: f64,
}

pub fn band_summary(spec: &CoherenceSpectrum) -> Result<BandSummary> {
    let nyq = spec.nyquist();
    Ok(BandSummary {
        sample_rate: spec.sample_rate,
        fft_size: spec.fft_size,
        n_blocks_averaged: spec.n_blocks_averaged,
        full: band_average_coherence(spec, 0.0, nyq)?,
        low_0_1500: band_average_coherence(spec, 0.0, 1500.0)?,
        mid_1500_2000: band_average_coherence(spec, 1500.0, 2000.0)?,
        high_2000_nyquist: band_average_coherence(spec, 2000.0, nyq)?,
    })
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<()> {
    let wav = read_wav(&a.input)?;
    if wav.channels() != 2 {
        return Err(Error::config(format!("analyze needs a stereo file, {} has {} channel(s)", a.input.display(), wav.channels())));
    }
    let spec = coherence(wav.audio.channel(0), wav.audio.channel(1), wav.sample_rate(), a.fft, None)?;
    if let Some(path) = &a.csv {
        let mut buf = Vec::new();
        spec.write_csv(&mut buf).map_err(|source| Error::Io { path: path.clone(), source })?;
        write_atomic(path, &buf)?;
    }
    emit(a.json.as_deref(), serde_json::to_string_pretty(&band_summary(&spec)?)? + "\n")
}

fn load_simulation(a: &SimulateArgs) -> Result<SimulationConfig> {
    match (&a.config, &a.preset) {
        (_, Some(name)) => SimulationConfig::preset(name).ok_or_else(|| Error::config(format!("unknown preset {name}"))),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            SimulationConfig::from_json(&text)
        }
        (None, None) => Err(Error::config("a config file or --preset is required")),
    }
}

fn file_stem(algorithm: &str, material: &str) -> String {
    format!("{algorithm}__{material}").replace(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-'), "_")
}

/// Long-format traces: `algorithm,material,time_s,eta_db`.
pub fn traces_csv(report: &ComparisonReport) -> String {
    let mut s = String::from("algorithm,material,time_s,eta_db\n");
    for r in &report.rows {
        for (t, e) in r.trace.times.iter().zip(&r.trace.eta_db) {
            let _ = writeln!(s, "{},{},{t:.3},{e:.6}", r.algorithm, r.material);
        }
    }
    s
}

pub fn cmd_simulate(a: &SimulateArgs, ranking: bool) -> Result<()> {
    let sim = load_simulation(a)?;
    std::fs::create_dir_all(&a.out).map_err(|source| Error::Io { path: a.out.clone(), source })?;
    let dump_dir = a.out.join("wav");
    if a.dump_wav {
        std::fs::create_dir_all(&dump_dir).map_err(|source| Error::Io { path: dump_dir.clone(), source })?;
    }
    let report = run_comparison_with(&sim, |entry, material, out| {
        if !a.dump_wav {
            return Ok(());
        }
        let stem = file_stem(&entry.name, &material.label());
        for (tag, audio) in [("far", &out.far), ("processed", &out.processed), ("mic", &out.cancellation.mics)] {
            write_wav(&dump_dir.join(format!("{stem}__{tag}.wav")), audio, crate::wav::BitDepth::Float32)?;
        }
        Ok(())
    })?;
    write_atomic(&a.out.join("report.json"), (serde_json::to_string_pretty(&report)? + "\n").as_bytes())?;
    write_atomic(&a.out.join("traces.csv"), traces_csv(&report).as_bytes())?;
    if ranking {
        print!("{}", ranking_table(&report, &sim));
    }
    Ok(())
}

/// Algorithms sorted by mean final misalignment (best first).
pub fn ranking_table(report: &ComparisonReport, sim: &SimulationConfig) -> String {
    let mut rows: Vec<(String, f64)> =
        sim.suite.iter().filter_map(|e| report.mean_final_db(&e.name).map(|v| (e.name.clone(), v))).collect();
    rows.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut s = format!("{:<24} {:>12}\n", "algorithm", "final dB");
    for (name, v) in rows {
        let _ = writeln!(s, "{name:<24} {v:>12.2}");
    }
    s
}

pub fn cmd_response(a: &ResponseArgs) -> Result<()> {
    let cfg = ScalConfig { beta: a.beta, n_min: a.order, n_max: a.order, ..ScalConfig::default() };
    cfg.validate()?;
    if !crate::decorrelators::check_stability(a.alpha, a.beta) {
        return Err(Error::config(format!(
            "|alpha|(1 + |beta|) must be below 1, got {}",
            a.alpha.abs() * (1.0 + a.beta.abs())
        )));
    }
    if a.bins < 2 {
        return Err(Error::config("--bins must be at least 2"));
    }
    let points = scal_transfer(a.alpha, a.beta, a.order, a.mode.into()).response(a.bins);
    let mut buf = Vec::new();
    let target = a.output.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    write_response_csv(&mut buf, &points).map_err(|source| Error::Io { path: target, source })?;
    match &a.output {
        Some(p) => write_atomic(p, &buf),
        None => {
            print!("{}", String::from_utf8_lossy(&buf));
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("stereo-decorr").chain(args.iter().copied())).unwrap()
    }

    fn process_args(args: &[&str]) -> ProcessArgs {
        let mut full = vec!["process", "in.wav", "out.wav"];
        full.extend_from_slice(args);
        match parse(&full).command {
            Command::Process(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn scal_flags_map_onto_config() {
        let a = process_args(&["--method", "scal", "--beta", "0.3", "--nmin", "4", "--nmax", "8", "--noise"]);
        match decorrelator_from_args(&a).unwrap() {
            DecorrelatorConfig::Scal { scal, noise } => {
                assert_eq!((scal.beta, scal.n_min, scal.n_max), (0.3, 4, 8));
                assert!(noise.is_some());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn flags_of_other_methods_rejected() {
        let a = process_args(&["--method", "none", "--beta", "0.3"]);
        assert_eq!(decorrelator_from_args(&a).unwrap_err().exit_code(), 2);
        let a = process_args(&["--method", "comb-allpass", "--nmin", "3"]);
        assert!(decorrelator_from_args(&a).is_err());
    }

    #[test]
    fn file_stems_are_safe() {
        assert_eq!(file_stem("scal", "a/b c"), "scal__a_b_c");
    }
}
