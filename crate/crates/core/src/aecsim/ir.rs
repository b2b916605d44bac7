use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Diffuse-tail level relative to the direct path.
pub const TAIL_GAIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseResponse {
    pub taps: Vec<f64>,
    pub sample_rate: u32,
    pub label: String,
}

impl ImpulseResponse {
    pub fn new(taps: Vec<f64>, sample_rate: u32, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite(format!("impulse response {label}")));
        }
        if taps.iter().all(|&t| t == 0.0) {
            return Err(Error::config(format!("impulse response {label} has zero energy")));
        }
        Ok(Self { taps, sample_rate, label })
    }

    pub fn unit(sample_rate: u32, label: impl Into<String>) -> Self {
        Self { taps: vec![1.0], sample_rate, label: label.into() }
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum()
    }

    pub fn truncated(&self, len: usize) -> Vec<f64> {
        let mut t = self.taps.clone();
        t.resize(len, 0.0);
        t
    }
}

/// Exponentially decaying noise tail behind a direct-path spike.
///
/// The amplitude envelope is `10^(−3·t/rt60)`, so the energy envelope has
/// fallen by 60 dB `rt60_ms` after the direct path. The direct path sits
/// at a random delay of up to 1 ms.
pub fn synth_room_ir(rt60_ms: f64, length_taps: usize, sample_rate: u32, seed: u64) -> Result<ImpulseResponse> {
    if !(rt60_ms > 0.0 && rt60_ms.is_finite()) {
        return Err(Error::config(format!("rt60_ms must be positive, got {rt60_ms}")));
    }
    if length_taps == 0 {
        return Err(Error::config("impulse response length must be positive"));
    }
    let mut rng = rng_from_seed(seed);
    let max_delay = ((sample_rate as usize) / 1000).clamp(1, length_taps.saturating_sub(1).max(1));
    let delay = rng.gen_range(0..max_delay.min(length_taps));
    let decay_per_sample = -3.0 / (rt60_ms * 1e-3 * sample_rate as f64);
    let mut taps = vec![0.0; length_taps];
    taps[delay] = 1.0;
    for (n, tap) in taps.iter_mut().enumerate().skip(delay + 1) {
        let g: f64 = rng.sample(StandardNormal);
        *tap = TAIL_GAIN * g * 10f64.powf(decay_per_sample * (n - delay) as f64);
    }
    ImpulseResponse::new(taps, sample_rate, format!("room_rt{rt60_ms:.0}ms_seed{seed}"))
}
