//! Stereo echo-cancellation evaluation loop.
//!
//! A mono source is picked up by remote microphones, run through a
//! decorrelator, played into the near-end room, mixed with white
//! background noise at a fixed SNR and cancelled by the MDF filter. The
//! output is the normalized misalignment of the adapted filter against the
//! true near-end impulse responses over time.

pub mod conv;
pub mod ir;
pub mod material;
pub mod mdf;

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{band_average_coherence, coherence, misalignment_db_multi, MisalignmentTrace};
use crate::buffer::AudioBuffer;
use crate::decorrelators::{process_buffer, CombAllpassConfig, DecorrelatorConfig, ScalConfig};
use crate::error::{Error, Result};
use crate::psynoise::NoiseInjectorConfig;
use crate::seed::derive_seed;
use crate::windows::WindowSpec;

pub use conv::convolve;
pub use ir::{synth_room_ir, ImpulseResponse};
pub use material::{MaterialKind, MaterialSpec};
pub use mdf::{MdfConfig, MdfFilter};

pub const SCHEMA_VERSION: u32 = 1;

/// Where a set of impulse responses comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IrSource {
    Synthetic { rt60_ms: f64, length_taps: usize },
    /// One response per WAV channel.
    Wav { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteSpec {
    /// Number of remote microphones (far-end channels).
    pub channels: usize,
    pub ir: IrSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NearSpec {
    /// Number of near-end microphones, each with its own canceller.
    pub mics: usize,
    /// For WAV sources, channel `mic · n_far + speaker`.
    pub ir: IrSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub name: String,
    pub decorrelator: DecorrelatorConfig,
}

fn default_interval() -> f64 {
    0.5
}

fn default_rise() -> f64 {
    20.0
}

fn default_fft() -> usize {
    1024
}

/// Versioned JSON simulation document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub schema_version: u32,
    pub sample_rate: u32,
    pub duration_s: f64,
    pub seed: u64,
    pub snr_db: f64,
    /// `None`: the source feeds a single far-end channel directly.
    #[serde(default)]
    pub remote: Option<RemoteSpec>,
    pub near: NearSpec,
    #[serde(default)]
    pub aec: MdfConfig,
    pub materials: Vec<MaterialSpec>,
    pub suite: Vec<SuiteEntry>,
    #[serde(default = "default_interval")]
    pub report_interval_s: f64,
    #[serde(default = "default_rise")]
    pub max_rise_db: f64,
    /// Block length of the coherence estimate in the report.
    #[serde(default = "default_fft")]
    pub coherence_fft_size: usize,
}

/// Resolved configuration of a single run.
#[derive(Debug, Clone)]
pub struct EchoSimConfig {
    pub sample_rate: u32,
    pub remote_irs: Vec<ImpulseResponse>,
    /// `near_irs[mic][speaker]`.
    pub near_irs: Vec<Vec<ImpulseResponse>>,
    pub snr_db: f64,
    pub decorrelator: DecorrelatorConfig,
    pub aec: MdfConfig,
    pub duration_s: f64,
    pub seed: u64,
    pub report_interval_s: f64,
    pub max_rise_db: f64,
}

fn desk_scal(window: usize) -> ScalConfig {
    ScalConfig { window: WindowSpec { length: window, ..WindowSpec::default() }, ..ScalConfig::default() }
}

fn desk_noise(window: usize) -> NoiseInjectorConfig {
    NoiseInjectorConfig { window: WindowSpec { length: window, ..WindowSpec::default() }, ..NoiseInjectorConfig::default() }
}

/// The five chains compared: no processing, the proposed chain, the
/// comb-allpass variant, the first-order allpass and the smoothed
/// absolute value.
pub fn standard_suite(window: usize) -> Vec<SuiteEntry> {
    vec![
        SuiteEntry { name: "none".into(), decorrelator: DecorrelatorConfig::None },
        SuiteEntry {
            name: "scal".into(),
            decorrelator: DecorrelatorConfig::Scal { scal: desk_scal(window), noise: Some(desk_noise(window)) },
        },
        SuiteEntry {
            name: "comb_allpass".into(),
            decorrelator: DecorrelatorConfig::CombAllpass {
                comb: CombAllpassConfig { window: WindowSpec { length: window, ..WindowSpec::default() }, ..Default::default() },
                noise: Some(desk_noise(window)),
            },
        },
        SuiteEntry {
            name: "first_order_allpass".into(),
            decorrelator: DecorrelatorConfig::FirstOrderAllpass { allpass: Default::default() },
        },
        SuiteEntry {
            name: "smoothed_abs".into(),
            decorrelator: DecorrelatorConfig::SmoothedAbs { smoothed: Default::default() },
        },
    ]
}

impl SimulationConfig {
    /// One channel, white noise, 512-tap echo path and filter.
    pub fn mono_sanity() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            sample_rate: 16000,
            duration_s: 10.0,
            seed: 1,
            snr_db: 40.0,
            remote: None,
            near: NearSpec { mics: 1, ir: IrSource::Synthetic { rt60_ms: 220.0, length_taps: 512 } },
            aec: MdfConfig { filter_length_taps: 512, block_size: 128, ..MdfConfig::default() },
            materials: vec![MaterialSpec::new(MaterialKind::WhiteNoise, 1)],
            suite: vec![SuiteEntry { name: "none".into(), decorrelator: DecorrelatorConfig::None }],
            report_interval_s: 0.5,
            max_rise_db: 20.0,
            coherence_fft_size: 1024,
        }
    }

    /// 16 kHz stereo comparison with 1024-tap responses and filters.
    pub fn desk_stereo() -> Self {
        Self {
            remote: Some(RemoteSpec { channels: 2, ir: IrSource::Synthetic { rt60_ms: 220.0, length_taps: 1024 } }),
            near: NearSpec { mics: 1, ir: IrSource::Synthetic { rt60_ms: 220.0, length_taps: 1024 } },
            aec: MdfConfig { filter_length_taps: 1024, block_size: 256, ..MdfConfig::default() },
            materials: vec![MaterialSpec::new(MaterialKind::SpeechLike, 1), MaterialSpec::new(MaterialKind::SpeechLike, 2)],
            suite: standard_suite(512),
            ..Self::mono_sanity()
        }
    }

    /// 44.1 kHz with 8192-tap responses and filters.
    pub fn full_scale() -> Self {
        Self {
            sample_rate: 44100,
            remote: Some(RemoteSpec { channels: 2, ir: IrSource::Synthetic { rt60_ms: 220.0, length_taps: 8192 } }),
            near: NearSpec { mics: 1, ir: IrSource::Synthetic { rt60_ms: 220.0, length_taps: 8192 } },
            aec: MdfConfig { filter_length_taps: 8192, block_size: 1024, ..MdfConfig::default() },
            suite: standard_suite(1024),
            coherence_fft_size: 2048,
            ..Self::desk_stereo()
        }
    }

    /// 16384-tap responses against an 8192-tap filter.
    pub fn long_room() -> Self {
        Self {
            remote: Some(RemoteSpec { channels: 2, ir: IrSource::Synthetic { rt60_ms: 220.0, length_taps: 16384 } }),
            near: NearSpec { mics: 2, ir: IrSource::Synthetic { rt60_ms: 220.0, length_taps: 16384 } },
            ..Self::full_scale()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "mono_sanity" => Some(Self::mono_sanity()),
            "desk_stereo" => Some(Self::desk_stereo()),
            "full_scale" => Some(Self::full_scale()),
            "long_room" => Some(Self::long_room()),
            _ => None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field; problems are reported with their JSON path.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            problems.push(format!("schema_version: expected {SCHEMA_VERSION}, got {}", self.schema_version));
        }
        if !(8000..=48000).contains(&self.sample_rate) {
            problems.push(format!("sample_rate: must be in 8000..=48000, got {}", self.sample_rate));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            problems.push("duration_s: must be positive".into());
        }
        if !self.snr_db.is_finite() {
            problems.push("snr_db: must be finite".into());
        }
        if !(self.report_interval_s > 0.0) {
            problems.push("report_interval_s: must be positive".into());
        }
        if let Some(r) = &self.remote {
            if r.channels == 0 {
                problems.push("remote.channels: must be positive".into());
            }
            check_ir_source(&r.ir, "remote.ir", &mut problems);
        }
        if self.near.mics == 0 {
            problems.push("near.mics: must be positive".into());
        }
        check_ir_source(&self.near.ir, "near.ir", &mut problems);
        if let Err(e) = self.aec.validate() {
            problems.push(format!("aec: {e}"));
        }
        if self.materials.is_empty() {
            problems.push("materials: at least one entry required".into());
        }
        if self.suite.is_empty() {
            problems.push("suite: at least one entry required".into());
        }
        for (i, entry) in self.suite.iter().enumerate() {
            if let Err(e) = entry.decorrelator.validate(self.sample_rate) {
                problems.push(format!("suite[{i}].decorrelator: {e}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn n_far(&self) -> usize {
        self.remote.as_ref().map_or(1, |r| r.channels)
    }

    fn load_irs(&self, src: &IrSource, count: usize, label: &str) -> Result<Vec<ImpulseResponse>> {
        match src {
            IrSource::Synthetic { rt60_ms, length_taps } => (0..count)
                .map(|i| {
                    let seed = derive_seed(self.seed, &format!("{label}.{i}"));
                    let mut ir = synth_room_ir(*rt60_ms, *length_taps, self.sample_rate, seed)?;
                    ir.label = format!("{label}.{i}");
                    Ok(ir)
                })
                .collect(),
            IrSource::Wav { path } => {
                let wav = crate::wav::read_wav(path)?;
                if wav.sample_rate() != self.sample_rate {
                    return Err(Error::config(format!(
                        "{label}: {} is {} Hz but the simulation runs at {} Hz",
                        path.display(),
                        wav.sample_rate(),
                        self.sample_rate
                    )));
                }
                if wav.channels() != count {
                    return Err(Error::config(format!(
                        "{label}: {} has {} channels, expected {count}",
                        path.display(),
                        wav.channels()
                    )));
                }
                wav.audio
                    .into_channels()
                    .into_iter()
                    .enumerate()
                    .map(|(i, taps)| ImpulseResponse::new(taps, self.sample_rate, format!("{label}.{i}")))
                    .collect()
            }
        }
    }

    /// Resolves impulse responses for entry `suite_index`.
    pub fn resolve(&self, suite_index: usize) -> Result<EchoSimConfig> {
        self.validate()?;
        let n_far = self.n_far();
        let remote_irs = match &self.remote {
            Some(r) => self.load_irs(&r.ir, r.channels, "remote")?,
            None => vec![ImpulseResponse::unit(self.sample_rate, "direct")],
        };
        let flat = self.load_irs(&self.near.ir, self.near.mics * n_far, "near")?;
        let near_irs = flat.chunks(n_far).map(|c| c.to_vec()).collect();
        Ok(EchoSimConfig {
            sample_rate: self.sample_rate,
            remote_irs,
            near_irs,
            snr_db: self.snr_db,
            decorrelator: self.suite[suite_index].decorrelator.clone(),
            aec: self.aec.clone(),
            duration_s: self.duration_s,
            seed: self.seed,
            report_interval_s: self.report_interval_s,
            max_rise_db: self.max_rise_db,
        })
    }
}

fn check_ir_source(src: &IrSource, path: &str, problems: &mut Vec<String>) {
    match src {
        IrSource::Synthetic { rt60_ms, length_taps } => {
            if !(*rt60_ms > 0.0 && rt60_ms.is_finite()) {
                problems.push(format!("{path}.rt60_ms: must be positive"));
            }
            if *length_taps == 0 {
                problems.push(format!("{path}.length_taps: must be positive"));
            }
        }
        IrSource::Wav { path: p } if p.as_os_str().is_empty() => problems.push(format!("{path}.path: empty")),
        IrSource::Wav { .. } => {}
    }
}

/// Remote pickup: one source convolved with each remote response.
pub fn simulate_remote(source: &[f64], remote_irs: &[ImpulseResponse], sample_rate: u32) -> Result<AudioBuffer> {
    if remote_irs.is_empty() {
        return Err(Error::config("at least one remote impulse response is required"));
    }
    AudioBuffer::new(remote_irs.iter().map(|ir| convolve(source, &ir.taps)).collect(), sample_rate)
}

/// Result of cancelling one processed far-end signal.
#[derive(Debug, Clone)]
pub struct CancellationRun {
    pub trace: MisalignmentTrace,
    /// Echo-to-noise power ratio per microphone.
    pub measured_snr_db: Vec<f64>,
    /// Adapted responses `[mic][speaker]`.
    pub estimates: Vec<Vec<Vec<f64>>>,
    /// Microphone signals (echo plus noise).
    pub mics: AudioBuffer,
}

/// Near-end room, background noise and stereo MDF cancellation.
pub fn simulate_near_and_cancel(far: &AudioBuffer, cfg: &EchoSimConfig) -> Result<CancellationRun> {
    let n_far = far.n_channels();
    let sr = cfg.sample_rate;
    if far.sample_rate() != sr {
        return Err(Error::config("far-end sample rate does not match the simulation"));
    }
    if cfg.near_irs.iter().any(|row| row.len() != n_far) {
        return Err(Error::config(format!("every microphone needs {n_far} near-end responses")));
    }
    let len = far.len();
    let b = cfg.aec.block_size;
    let filter_len = cfg.aec.filter_length_taps;

    let mut mics = Vec::with_capacity(cfg.near_irs.len());
    let mut measured_snr_db = Vec::with_capacity(cfg.near_irs.len());
    for (m, row) in cfg.near_irs.iter().enumerate() {
        let mut echo = vec![0.0; len];
        for (c, ir) in row.iter().enumerate() {
            for (e, v) in echo.iter_mut().zip(convolve(far.channel(c), &ir.taps)) {
                *e += v;
            }
        }
        let echo_power = mean_square(&echo);
        let mut noise = material::white_noise(len, derive_seed(cfg.seed, &format!("near_noise.{m}")), 1.0);
        let target = echo_power / 10f64.powf(cfg.snr_db / 10.0);
        let np = mean_square(&noise);
        let gain = if np > 0.0 { (target / np).sqrt() } else { 0.0 };
        noise.iter_mut().for_each(|v| *v *= gain);
        let noise_power = mean_square(&noise);
        measured_snr_db.push(if noise_power > 0.0 { 10.0 * (echo_power / noise_power).log10() } else { f64::INFINITY });
        mics.push(echo.iter().zip(&noise).map(|(e, n)| e + n).collect::<Vec<f64>>());
    }

    let truth: Vec<Vec<f64>> = cfg
        .near_irs
        .iter()
        .flat_map(|row| row.iter().map(|ir| ir.truncated(filter_len)))
        .collect();

    let mut filters = (0..mics.len()).map(|_| MdfFilter::new(cfg.aec.clone(), n_far)).collect::<Result<Vec<_>>>()?;
    let interval = ((cfg.report_interval_s * sr as f64).round() as usize).max(1);
    let mut next_report = interval;
    let mut trace = MisalignmentTrace { eta_db: Vec::new(), times: Vec::new(), filter_length: filter_len };
    let mut best = f64::INFINITY;
    let n_blocks = len / b;
    for blk in 0..n_blocks {
        let range = blk * b..(blk + 1) * b;
        let far_blocks: Vec<&[f64]> = (0..n_far).map(|c| &far.channel(c)[range.clone()]).collect();
        for (f, mic) in filters.iter_mut().zip(&mics) {
            f.process_block(&far_blocks, &mic[range.clone()])?;
        }
        let done = (blk + 1) * b;
        if done >= next_report {
            next_report += interval;
            let est: Vec<Vec<f64>> = filters.iter().flat_map(|f| f.impulse_responses()).collect();
            let eta = misalignment_db_multi(&truth, &est)?;
            let t = done as f64 / sr as f64;
            best = best.min(eta);
            if eta - best > cfg.max_rise_db {
                return Err(Error::Divergence { time_s: t, eta_db: eta, rise_db: eta - best });
            }
            trace.eta_db.push(eta);
            trace.times.push(t);
        }
    }
    let estimates = filters.iter().map(|f| f.impulse_responses()).collect();
    Ok(CancellationRun { trace, measured_snr_db, estimates, mics: AudioBuffer::new(mics, sr)? })
}

fn mean_square(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64
}

/// Band-averaged coherence of a stereo far-end signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCoherence {
    pub full: f64,
    /// 0–1.5 kHz.
    pub low: f64,
    /// 1.5–2 kHz.
    pub mid: f64,
    /// 2 kHz to Nyquist.
    pub high: f64,
}

pub fn band_coherence(stereo: &AudioBuffer, fft_size: usize) -> Result<BandCoherence> {
    let spec = coherence(stereo.channel(0), stereo.channel(1), stereo.sample_rate(), fft_size, None)?;
    let nyq = spec.nyquist();
    Ok(BandCoherence {
        full: band_average_coherence(&spec, 0.0, nyq)?,
        low: band_average_coherence(&spec, 0.0, 1500.0)?,
        mid: band_average_coherence(&spec, 1500.0, 2000.0)?,
        high: band_average_coherence(&spec, 2000.0, nyq)?,
    })
}

/// Everything produced by one (algorithm, material) run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub far: AudioBuffer,
    pub processed: AudioBuffer,
    pub cancellation: CancellationRun,
    pub coherence: Option<BandCoherence>,
}

/// Remote pickup, decorrelation and cancellation for one source.
pub fn run_single(cfg: &EchoSimConfig, source: &[f64], coherence_fft_size: usize) -> Result<RunOutput> {
    let far = simulate_remote(source, &cfg.remote_irs, cfg.sample_rate)?;
    let processed = process_buffer(&cfg.decorrelator, &far, derive_seed(cfg.seed, "decorrelator"))?;
    if !processed.all_finite() {
        return Err(Error::NonFinite("decorrelator output".into()));
    }
    let coherence = if processed.n_channels() >= 2 { Some(band_coherence(&processed, coherence_fft_size)?) } else { None };
    let cancellation = simulate_near_and_cancel(&processed, cfg)?;
    Ok(RunOutput { far, processed, cancellation, coherence })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algorithm: String,
    pub material: String,
    pub final_misalignment_db: f64,
    pub min_misalignment_db: f64,
    /// Final `1/η`, linear.
    pub final_inverse_misalignment: f64,
    pub measured_snr_db: Vec<f64>,
    pub coherence: Option<BandCoherence>,
    pub runtime_ms: f64,
    #[serde(skip)]
    pub trace: MisalignmentTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub sample_rate: u32,
    pub duration_s: f64,
    pub snr_db: f64,
    pub filter_length_taps: usize,
    pub rows: Vec<ReportRow>,
}

impl ComparisonReport {
    pub fn row(&self, algorithm: &str, material: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm && r.material == material)
    }

    /// Mean final misalignment of one algorithm across materials.
    pub fn mean_final_db(&self, algorithm: &str) -> Option<f64> {
        let v: Vec<f64> = self.rows.iter().filter(|r| r.algorithm == algorithm).map(|r| r.final_misalignment_db).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// JSON with runtime fields removed, for reproducibility checks.
    pub fn to_json_without_timing(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(rows) = v.get_mut("rows").and_then(|r| r.as_array_mut()) {
            for row in rows {
                if let Some(obj) = row.as_object_mut() {
                    obj.remove("runtime_ms");
                }
            }
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

/// Runs every suite entry on every material, in parallel, and collects
/// the results in `(suite, material)` order.
pub fn run_comparison(sim: &SimulationConfig) -> Result<ComparisonReport> {
    run_comparison_with(sim, |_, _, _| Ok(()))
}

/// As [`run_comparison`], handing each finished run to `inspect` (used for
/// debug dumps). `inspect` is called from worker threads.
pub fn run_comparison_with<F>(sim: &SimulationConfig, inspect: F) -> Result<ComparisonReport>
where
    F: Fn(&SuiteEntry, &MaterialSpec, &RunOutput) -> Result<()> + Sync,
{
    sim.validate()?;
    let n = (sim.duration_s * sim.sample_rate as f64).round() as usize;
    let sources: Vec<Vec<f64>> = sim.materials.iter().map(|m| m.generate(n, sim.sample_rate)).collect();
    let configs = (0..sim.suite.len()).map(|i| sim.resolve(i)).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> =
        (0..sim.suite.len()).flat_map(|s| (0..sim.materials.len()).map(move |m| (s, m))).collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len()).max(1);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<std::sync::Mutex<Option<Result<ReportRow>>>> = jobs.iter().map(|_| Default::default()).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let Some(&(s, m)) = jobs.get(j) else { break };
                let started = Instant::now();
                let out = run_single(&configs[s], &sources[m], sim.coherence_fft_size).and_then(|out| {
                    inspect(&sim.suite[s], &sim.materials[m], &out)?;
                    let trace = out.cancellation.trace.clone();
                    let final_db = trace.final_db().ok_or_else(|| {
                        Error::config("simulation too short for a single misalignment report")
                    })?;
                    Ok(ReportRow {
                        algorithm: sim.suite[s].name.clone(),
                        material: sim.materials[m].label(),
                        final_misalignment_db: final_db,
                        min_misalignment_db: trace.eta_db.iter().copied().fold(f64::INFINITY, f64::min),
                        final_inverse_misalignment: 10f64.powf(-final_db / 10.0),
                        measured_snr_db: out.cancellation.measured_snr_db.clone(),
                        coherence: out.coherence.clone(),
                        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
                        trace,
                    })
                });
                *results[j].lock().expect("poisoned") = Some(out);
            });
        }
    });
    let rows = results
        .into_iter()
        .map(|r| r.into_inner().expect("poisoned").expect("every job ran"))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport {
        schema_version: SCHEMA_VERSION,
        sample_rate: sim.sample_rate,
        duration_s: sim.duration_s,
        snr_db: sim.snr_db,
        filter_length_taps: sim.aec.filter_length_taps,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in ["mono_sanity", "desk_stereo", "full_scale", "long_room"] {
            let p = SimulationConfig::preset(name).unwrap();
            p.validate().unwrap();
            let text = serde_json::to_string(&p).unwrap();
            assert_eq!(SimulationConfig::from_json(&text).unwrap(), p);
        }
    }

    #[test]
    fn validation_names_paths() {
        let mut cfg = SimulationConfig::mono_sanity();
        cfg.schema_version = 2;
        cfg.aec.block_size = 100;
        cfg.suite[0].decorrelator = DecorrelatorConfig::Scal { scal: ScalConfig { beta: 2.0, ..Default::default() }, noise: None };
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("schema_version"));
        assert!(msg.contains("aec:"));
        assert!(msg.contains("suite[0].decorrelator"));
    }

    #[test]
    fn remote_identity_and_silence() {
        let src: Vec<f64> = (0..100).map(|n| n as f64).collect();
        let irs = vec![ImpulseResponse::unit(8000, "a"), ImpulseResponse::unit(8000, "b")];
        let out = simulate_remote(&src, &irs, 8000).unwrap();
        assert_eq!(out.channel(0), &src[..]);
        assert_eq!(out.channel(1), &src[..]);
        let ir = synth_room_ir(220.0, 256, 8000, 1).unwrap();
        let z = simulate_remote(&[0.0; 50], &[ir.clone(), ir], 8000).unwrap();
        assert!(z.channel(0).iter().all(|&v| v == 0.0));
    }
}
