//! Psychoacoustically masked noise injection.
//!
//! Each analysis window of the input gets a per-band masking threshold
//! from a Bark-band spreading model. Noise with exactly that band power
//! and uniformly random phase is synthesized in the frequency domain,
//! windowed once, and overlap-added into a noise stream that trails its
//! analysis frame by one full window. The input itself is never delayed.

use std::collections::VecDeque;
use std::f64::consts::TAU;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng as _;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::decorrelators::Decorrelator;
use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, Rng};
use crate::windows::{make_window, WindowSpec};

/// Critical-band edges in Hz; the last band runs to Nyquist.
pub const BARK_EDGES_HZ: [f64; 25] = [
    0.0, 100.0, 200.0, 300.0, 400.0, 510.0, 630.0, 770.0, 920.0, 1080.0, 1270.0, 1480.0, 1720.0, 2000.0,
    2320.0, 2700.0, 3150.0, 3700.0, 4400.0, 5300.0, 6400.0, 7700.0, 9500.0, 12000.0, 15500.0,
];

/// Masking spread toward lower bands, dB per Bark.
pub const LOWER_SLOPE_DB_PER_BARK: f64 = 25.0;
/// Masking spread toward higher bands, dB per Bark.
pub const UPPER_SLOPE_DB_PER_BARK: f64 = 10.0;
/// Bands entirely below this frequency get the low-band emphasis.
pub const LOWBAND_EDGE_HZ: f64 = 1500.0;
/// Bands entirely above this frequency get the high-band rolloff.
pub const HIGHBAND_EDGE_HZ: f64 = 2000.0;

/// Frequency to Bark.
pub fn hz_to_bark(f: f64) -> f64 {
    13.0 * (0.00076 * f).atan() + 3.5 * (f / 7500.0).powi(2).atan()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseInjectorConfig {
    pub window: WindowSpec,
    pub lowband_emphasis_db: f64,
    /// Gain (usually negative) applied above 2 kHz.
    pub highband_rolloff_db: f64,
    /// Threshold level relative to the spread masker energy. `null` in JSON
    /// (negative infinity) disables the noise.
    #[serde(with = "neg_inf_as_null")]
    pub threshold_offset_db: f64,
    pub seed: u64,
}

impl Default for NoiseInjectorConfig {
    fn default() -> Self {
        Self {
            window: WindowSpec::default(),
            lowband_emphasis_db: 6.0,
            highband_rolloff_db: -12.0,
            threshold_offset_db: -18.0,
            seed: 0,
        }
    }
}

impl NoiseInjectorConfig {
    pub fn disabled() -> Self {
        Self { threshold_offset_db: f64::NEG_INFINITY, ..Self::default() }
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        self.window.validate()?;
        if !self.lowband_emphasis_db.is_finite() || !self.highband_rolloff_db.is_finite() {
            return Err(Error::config("noise emphasis and rolloff must be finite"));
        }
        if self.threshold_offset_db.is_nan() || self.threshold_offset_db == f64::INFINITY {
            return Err(Error::config("threshold_offset_db must be finite or -inf"));
        }
        if sample_rate == 0 {
            return Err(Error::config("sample rate must be positive"));
        }
        Ok(())
    }
}

mod neg_inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::NEG_INFINITY {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    /// First bin (inclusive).
    pub lo_bin: usize,
    /// Last bin (exclusive).
    pub hi_bin: usize,
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl Band {
    pub fn n_bins(&self) -> usize {
        self.hi_bin - self.lo_bin
    }
}

/// Band layout, spreading matrix and per-band gains for one sample rate and
/// window length.
#[derive(Debug, Clone)]
pub struct MaskingModel {
    bands: Vec<Band>,
    /// `spread[b][j]`: linear power gain from masker band `j` onto band `b`.
    spread: Vec<Vec<f64>>,
    /// Offset plus emphasis/rolloff, linear power.
    gains: Vec<f64>,
    fft_len: usize,
}

impl MaskingModel {
    pub fn new(cfg: &NoiseInjectorConfig, sample_rate: u32) -> Result<Self> {
        cfg.validate(sample_rate)?;
        let fft_len = cfg.window.length;
        let nyquist = sample_rate as f64 / 2.0;
        let bin_hz = sample_rate as f64 / fft_len as f64;
        let n_bins = fft_len / 2 + 1;

        let mut edges: Vec<f64> = BARK_EDGES_HZ.iter().copied().filter(|&e| e < nyquist).collect();
        edges.push(nyquist);
        let mut bands: Vec<Band> = Vec::new();
        let mut lo_bin = 0;
        for w in edges.windows(2) {
            let hi_bin = if w[1] >= nyquist { n_bins } else { ((w[1] / bin_hz).ceil() as usize).min(n_bins) };
            if hi_bin > lo_bin {
                bands.push(Band { lo_bin, hi_bin, lo_hz: lo_bin as f64 * bin_hz, hi_hz: w[1] });
                lo_bin = hi_bin;
            } else if let Some(last) = bands.last_mut() {
                last.hi_hz = w[1];
            }
        }
        if let Some(last) = bands.last_mut() {
            last.hi_bin = n_bins;
        }

        let centers: Vec<f64> = bands.iter().map(|b| hz_to_bark(0.5 * (b.lo_hz + b.hi_hz))).collect();
        let spread = centers
            .iter()
            .map(|&zb| {
                centers
                    .iter()
                    .map(|&zj| {
                        let d = zb - zj;
                        let atten_db = if d < 0.0 { LOWER_SLOPE_DB_PER_BARK * -d } else { UPPER_SLOPE_DB_PER_BARK * d };
                        db_to_power(-atten_db)
                    })
                    .collect()
            })
            .collect();
        let gains = bands
            .iter()
            .map(|b| {
                let shelf = if b.hi_hz <= LOWBAND_EDGE_HZ {
                    cfg.lowband_emphasis_db
                } else if b.lo_hz >= HIGHBAND_EDGE_HZ {
                    cfg.highband_rolloff_db
                } else {
                    0.0
                };
                db_to_power(cfg.threshold_offset_db + shelf)
            })
            .collect();
        Ok(Self { bands, spread, gains, fft_len })
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    /// Sums a one-sided power spectrum into bands.
    pub fn band_powers(&self, power: &[f64]) -> Vec<f64> {
        self.bands.iter().map(|b| power[b.lo_bin..b.hi_bin].iter().sum()).collect()
    }
}

fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn power_to_db(p: f64) -> f64 {
    if p > 0.0 {
        10.0 * p.log10()
    } else {
        -300.0
    }
}

/// Allowed noise power per band for one analysis window.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskingThreshold {
    pub band_energies: Vec<f64>,
    /// `(lo_bin, hi_bin)` per band, half-open.
    pub band_edges: Vec<(usize, usize)>,
    pub frame_index: u64,
}

/// Spread, offset and shaped masking threshold of one frame.
///
/// `frame_power` is the one-sided power spectrum `|X(k)|²`, `k = 0..=L/2`,
/// of the analysis-windowed frame.
pub fn compute_masking_threshold(frame_power: &[f64], model: &MaskingModel, frame_index: u64) -> MaskingThreshold {
    let energies = model.band_powers(frame_power);
    let band_energies = model
        .spread
        .iter()
        .zip(&model.gains)
        .map(|(row, &g)| {
            if g == 0.0 {
                return 0.0;
            }
            g * row.iter().zip(&energies).map(|(s, e)| s * e).sum::<f64>()
        })
        .collect();
    MaskingThreshold {
        band_energies,
        band_edges: model.bands.iter().map(|b| (b.lo_bin, b.hi_bin)).collect(),
        frame_index,
    }
}

/// Half-width, in bins, of the neighbourhood whose quietest band sets the
/// noise density of a bin.
pub const LEAKAGE_GUARD_BINS: usize = 2;

/// Frequency-domain noise synthesis for one window length.
pub struct NoiseSynth {
    window: Vec<f64>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    density: Vec<f64>,
}

impl NoiseSynth {
    pub fn new(spec: &WindowSpec) -> Result<Self> {
        let window = make_window(spec)?;
        let inverse = FftPlanner::new().plan_fft_inverse(spec.length);
        Ok(Self { window, inverse, buf: vec![Complex64::new(0.0, 0.0); spec.length], density: vec![0.0; spec.length / 2 + 1] })
    }

    /// One synthesis-windowed noise frame whose analysis band powers stay
    /// at or below `threshold` in expectation.
    ///
    /// Bin `k` of band `b` gets power `2·T_b / m_b` (the factor 2 undoes
    /// the `Σw² = L/2` of the window) with a uniformly random phase. Each
    /// bin is limited to the smallest density within
    /// [`LEAKAGE_GUARD_BINS`], so the window's main lobe cannot carry a
    /// loud band across a band edge.
    pub fn generate_masked_noise(&mut self, threshold: &MaskingThreshold, rng: &mut Rng) -> Vec<f64> {
        let len = self.window.len();
        let half = len / 2;
        self.density.fill(0.0);
        for (&(lo, hi), &t) in threshold.band_edges.iter().zip(&threshold.band_energies) {
            let d = if t > 0.0 { 2.0 * t / (hi - lo) as f64 } else { 0.0 };
            self.density[lo..hi].fill(d);
        }
        self.buf.fill(Complex64::new(0.0, 0.0));
        for k in 0..=half {
            let lo = k.saturating_sub(LEAKAGE_GUARD_BINS);
            let hi = (k + LEAKAGE_GUARD_BINS).min(half);
            let p = self.density[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
            if p <= 0.0 {
                continue;
            }
            let amp = p.sqrt();
            if k == 0 || k == half {
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                self.buf[k] = Complex64::new(sign * amp, 0.0);
            } else {
                let c = Complex64::from_polar(amp, rng.gen_range(0.0..TAU));
                self.buf[k] = c;
                self.buf[len - k] = c.conj();
            }
        }
        self.inverse.process(&mut self.buf);
        let scale = 1.0 / len as f64;
        self.buf.iter().zip(&self.window).map(|(c, w)| c.re * scale * w).collect()
    }
}

/// Per-frame record kept when recording is enabled.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame: u64,
    /// First sample of the analysis window (may be negative for pre-roll).
    pub analysis_start: i64,
    pub threshold: Vec<f64>,
    /// Band powers of the generated, windowed noise frame.
    pub injected: Vec<f64>,
}

/// Writes `frame,band,threshold_db,injected_db` rows.
pub fn write_threshold_csv<W: Write>(mut w: W, records: &[FrameRecord]) -> std::io::Result<()> {
    writeln!(w, "frame,band,threshold_db,injected_db")?;
    for r in records {
        for (b, (t, i)) in r.threshold.iter().zip(&r.injected).enumerate() {
            writeln!(w, "{},{},{:.4},{:.4}", r.frame, b, power_to_db(*t), power_to_db(*i))?;
        }
    }
    Ok(())
}

/// Streaming noise injector for one channel.
pub struct NoiseInjector {
    model: MaskingModel,
    synth: NoiseSynth,
    window: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    spectrum: Vec<Complex64>,
    history: VecDeque<f64>,
    /// Noise scheduled for the next L samples; front is the current sample.
    pending: VecDeque<f64>,
    rng: Rng,
    time: i64,
    frame: u64,
    enabled: bool,
    records: Option<Vec<FrameRecord>>,
}

impl NoiseInjector {
    pub fn new(cfg: NoiseInjectorConfig, sample_rate: u32) -> Result<Self> {
        let model = MaskingModel::new(&cfg, sample_rate)?;
        let len = cfg.window.length;
        Ok(Self {
            synth: NoiseSynth::new(&cfg.window)?,
            window: make_window(&cfg.window)?,
            forward: FftPlanner::new().plan_fft_forward(len),
            spectrum: vec![Complex64::new(0.0, 0.0); len],
            history: VecDeque::from(vec![0.0; len]),
            pending: VecDeque::from(vec![0.0; len]),
            rng: rng_from_seed(cfg.seed),
            time: 0,
            frame: 0,
            enabled: cfg.threshold_offset_db > f64::NEG_INFINITY,
            records: None,
            model,
        })
    }

    /// Keeps a [`FrameRecord`] for every generated frame.
    pub fn with_recording(mut self) -> Self {
        self.records = Some(Vec::new());
        self
    }

    pub fn records(&self) -> Option<&[FrameRecord]> {
        self.records.as_deref()
    }

    pub fn model(&self) -> &MaskingModel {
        &self.model
    }

    /// Delay between an analysis window and the noise it produces.
    pub fn noise_delay(&self) -> usize {
        self.window.len()
    }

    fn power_spectrum(&mut self, frame: impl Iterator<Item = f64>, windowed: bool) -> Vec<f64> {
        for ((slot, x), w) in self.spectrum.iter_mut().zip(frame).zip(&self.window) {
            *slot = Complex64::new(if windowed { x } else { x * w }, 0.0);
        }
        self.forward.process(&mut self.spectrum);
        self.spectrum[..=self.window.len() / 2].iter().map(|c| c.norm_sqr()).collect()
    }

    fn end_of_hop(&mut self) {
        let len = self.window.len();
        let frame_index = self.frame;
        self.frame += 1;
        let hist: Vec<f64> = self.history.iter().copied().collect();
        let power = self.power_spectrum(hist.into_iter(), false);
        let threshold = compute_masking_threshold(&power, &self.model, frame_index);
        let silent = threshold.band_energies.iter().all(|&t| t <= 0.0);
        let noise = if silent { None } else { Some(self.synth.generate_masked_noise(&threshold, &mut self.rng)) };
        if let Some(noise) = &noise {
            for (p, n) in self.pending.iter_mut().zip(noise) {
                *p += n;
            }
        }
        if self.records.is_some() {
            let injected = match &noise {
                Some(n) => {
                    let p = self.power_spectrum(n.clone().into_iter(), true);
                    self.model.band_powers(&p)
                }
                None => vec![0.0; self.model.bands.len()],
            };
            let rec = FrameRecord {
                frame: frame_index,
                analysis_start: self.time - len as i64,
                threshold: threshold.band_energies,
                injected,
            };
            self.records.as_mut().expect("checked").push(rec);
        }
    }

    #[inline]
    pub fn tick(&mut self, x: f64) -> f64 {
        if !self.enabled {
            return x;
        }
        self.history.pop_front();
        self.history.push_back(x);
        let n = self.pending.pop_front().unwrap_or(0.0);
        self.pending.push_back(0.0);
        self.time += 1;
        if self.time % (self.window.len() as i64 / 2) == 0 {
            self.end_of_hop();
        }
        x + n
    }
}

impl Decorrelator for NoiseInjector {
    fn process(&mut self, input: &[f64], output: &mut [f64]) -> Result<()> {
        crate::decorrelators::check_lengths(input, output)?;
        for (o, &x) in output.iter_mut().zip(input) {
            *o = self.tick(x);
        }
        Ok(())
    }

    fn latency(&self) -> usize {
        0
    }
}

/// Adds masked noise to a whole mono signal.
pub fn inject_noise(input: &[f64], cfg: &NoiseInjectorConfig, sample_rate: u32) -> Result<Vec<f64>> {
    let mut inj = NoiseInjector::new(cfg.clone(), sample_rate)?;
    Ok(input.iter().map(|&x| inj.tick(x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(sr: u32) -> MaskingModel {
        MaskingModel::new(&NoiseInjectorConfig::default(), sr).unwrap()
    }

    #[test]
    fn band_layout() {
        let m = model(44100);
        assert_eq!(m.bands().len(), 25);
        assert_eq!(m.bands()[0].lo_bin, 0);
        assert_eq!(m.bands().last().unwrap().hi_bin, 513);
        for w in m.bands().windows(2) {
            assert_eq!(w[0].hi_bin, w[1].lo_bin);
            assert!(w[0].n_bins() > 0);
        }
        let m16 = model(16000);
        assert_eq!(m16.bands().len(), 22);
        assert_eq!(m16.bands().last().unwrap().hi_bin, 513);
    }

    #[test]
    fn silent_frame_zero_threshold() {
        let m = model(44100);
        let t = compute_masking_threshold(&vec![0.0; 513], &m, 0);
        assert!(t.band_energies.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn threshold_is_linear_in_power() {
        let m = model(44100);
        let p: Vec<f64> = (0..513).map(|k| 1.0 + (k % 7) as f64).collect();
        let p2: Vec<f64> = p.iter().map(|v| 2.0 * v).collect();
        let a = compute_masking_threshold(&p, &m, 0);
        let b = compute_masking_threshold(&p2, &m, 0);
        for (x, y) in a.band_energies.iter().zip(&b.band_energies) {
            assert!((y / x - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn disabled_injector_is_identity() {
        let x: Vec<f64> = (0..5000).map(|n| (n as f64 * 0.01).sin()).collect();
        assert_eq!(inject_noise(&x, &NoiseInjectorConfig::disabled(), 44100).unwrap(), x);
    }

    #[test]
    fn offset_null_in_json_disables() {
        let cfg: NoiseInjectorConfig = serde_json::from_str(r#"{"threshold_offset_db": null}"#).unwrap();
        assert_eq!(cfg.threshold_offset_db, f64::NEG_INFINITY);
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"threshold_offset_db\":null"));
    }

    #[test]
    fn zero_threshold_gives_zero_noise() {
        let m = model(44100);
        let t = compute_masking_threshold(&vec![0.0; 513], &m, 0);
        let mut synth = NoiseSynth::new(&WindowSpec::default()).unwrap();
        let mut rng = rng_from_seed(1);
        assert!(synth.generate_masked_noise(&t, &mut rng).iter().all(|&v| v == 0.0));
    }
}
