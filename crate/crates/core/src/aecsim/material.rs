//! Synthetic far-end source material.

use std::f64::consts::TAU;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::seed::{rng_from_seed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialKind {
    WhiteNoise,
    PinkNoise,
    /// Voiced/unvoiced segments with pitch, formants and pauses.
    SpeechLike,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub kind: MaterialKind,
    #[serde(default)]
    pub seed: u64,
    /// Label used in reports; defaults to the kind.
    #[serde(default)]
    pub name: Option<String>,
}

impl MaterialSpec {
    pub fn new(kind: MaterialKind, seed: u64) -> Self {
        Self { kind, seed, name: None }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            let k = match self.kind {
                MaterialKind::WhiteNoise => "white_noise",
                MaterialKind::PinkNoise => "pink_noise",
                MaterialKind::SpeechLike => "speech_like",
            };
            format!("{k}_{}", self.seed)
        })
    }

    pub fn generate(&self, n: usize, sample_rate: u32) -> Vec<f64> {
        match self.kind {
            MaterialKind::WhiteNoise => white_noise(n, self.seed, 0.25),
            MaterialKind::PinkNoise => pink_noise(n, self.seed, 0.25),
            MaterialKind::SpeechLike => speech_like(n, sample_rate, self.seed),
        }
    }
}

/// Gaussian white noise with standard deviation `std`.
pub fn white_noise(n: usize, seed: u64, std: f64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Pink (−3 dB/octave) noise, RMS normalized to `rms`.
pub fn pink_noise(n: usize, seed: u64, rms: f64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    // Paul Kellet's refined pink filter.
    let mut b = [0.0f64; 7];
    let mut out: Vec<f64> = (0..n)
        .map(|_| {
            let w: f64 = rng.sample(StandardNormal);
            b[0] = 0.99886 * b[0] + w * 0.0555179;
            b[1] = 0.99332 * b[1] + w * 0.0750759;
            b[2] = 0.96900 * b[2] + w * 0.1538520;
            b[3] = 0.86650 * b[3] + w * 0.3104856;
            b[4] = 0.55000 * b[4] + w * 0.5329522;
            b[5] = -0.7616 * b[5] - w * 0.0168980;
            let y = b[0] + b[1] + b[2] + b[3] + b[4] + b[5] + b[6] + w * 0.5362;
            b[6] = w * 0.115926;
            y
        })
        .collect();
    normalize_rms(&mut out, rms);
    out
}

fn normalize_rms(x: &mut [f64], rms: f64) {
    let p = (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt();
    if p > 0.0 {
        x.iter_mut().for_each(|v| *v *= rms / p);
    }
}

/// Two-pole resonator.
struct Resonator {
    a1: f64,
    a2: f64,
    gain: f64,
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn new(freq: f64, bandwidth: f64, sample_rate: f64) -> Self {
        let r = (-std::f64::consts::PI * bandwidth / sample_rate).exp();
        let theta = TAU * freq / sample_rate;
        Self { a1: 2.0 * r * theta.cos(), a2: -r * r, gain: 1.0 - r, y1: 0.0, y2: 0.0 }
    }

    fn tick(&mut self, x: f64) -> f64 {
        let y = self.gain * x + self.a1 * self.y1 + self.a2 * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

fn speech_segment(rng: &mut Rng, out: &mut Vec<f64>, n: usize, sample_rate: f64) {
    let voiced = rng.gen_bool(0.75);
    let f1 = rng.gen_range(300.0..800.0);
    let f2 = rng.gen_range(900.0..2200.0);
    let f3: f64 = rng.gen_range(2300.0..3300.0);
    let mut formants = [
        Resonator::new(f1, 80.0, sample_rate),
        Resonator::new(f2, 120.0, sample_rate),
        Resonator::new(f3.min(0.45 * sample_rate), 180.0, sample_rate),
    ];
    let f0 = rng.gen_range(95.0..230.0);
    let mut phase = 0.0;
    let mut prev = 0.0;
    for i in 0..n {
        let t = i as f64 / n as f64;
        // Raised-cosine syllable envelope.
        let env = 0.5 - 0.5 * (TAU * t).cos();
        let noise: f64 = rng.sample(StandardNormal);
        let excitation = if voiced {
            let f = f0 * (1.0 + 0.05 * (TAU * 5.0 * i as f64 / sample_rate).sin());
            phase += f / sample_rate;
            let pulse = if phase >= 1.0 {
                phase -= 1.0;
                8.0
            } else {
                0.0
            };
            pulse + 0.05 * noise
        } else {
            // Fricative: differenced noise.
            let d = noise - prev;
            prev = noise;
            0.6 * d
        };
        let y: f64 = formants.iter_mut().map(|r| r.tick(excitation)).sum::<f64>() + if voiced { 0.0 } else { 0.3 * excitation };
        out.push(env * y);
    }
}

/// Speech-like signal: syllables of 80–350 ms separated by short pauses.
pub fn speech_like(n: usize, sample_rate: u32, seed: u64) -> Vec<f64> {
    let sr = sample_rate as f64;
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(n + sample_rate as usize);
    while out.len() < n {
        let seg = (rng.gen_range(0.08..0.35) * sr) as usize;
        speech_segment(&mut rng, &mut out, seg, sr);
        let pause = (rng.gen_range(0.02..0.15) * sr) as usize;
        out.extend(std::iter::repeat(0.0).take(pause));
    }
    out.truncate(n);
    // Low-level room tone so no block is digitally silent.
    let mut floor = white_noise(n, seed ^ 0xA5A5, 1.0);
    normalize_rms(&mut out, 0.1);
    floor.iter_mut().zip(&out).for_each(|(f, s)| *f = s + 1e-4 * *f);
    floor
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        for kind in [MaterialKind::WhiteNoise, MaterialKind::PinkNoise, MaterialKind::SpeechLike] {
            let m = MaterialSpec::new(kind, 3);
            assert_eq!(m.generate(4000, 16000), m.generate(4000, 16000));
            assert_eq!(m.generate(4000, 16000).len(), 4000);
        }
    }

    #[test]
    fn speech_like_is_bounded_and_nonstationary() {
        let x = speech_like(16000 * 4, 16000, 1);
        assert!(x.iter().all(|v| v.is_finite() && v.abs() < 2.0));
        let block_rms: Vec<f64> = x
            .chunks(1600)
            .map(|c| (c.iter().map(|v| v * v).sum::<f64>() / c.len() as f64).sqrt())
            .collect();
        let max = block_rms.iter().cloned().fold(0.0, f64::max);
        let min = block_rms.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min > 10.0);
    }
}
