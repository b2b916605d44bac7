//! Channel decorrelators.
//!
//! All processors are single-channel and streaming. Stereo processing runs
//! one independently seeded instance per channel (see [`process_buffer`]).

pub mod first_order;
pub mod response;
pub mod scal;
pub mod smoothed_abs;

use serde::{Deserialize, Serialize};

use crate::buffer::AudioBuffer;
use crate::error::{Error, Result};
use crate::psynoise::{NoiseInjector, NoiseInjectorConfig};
use crate::seed::{channel_seed, derive_seed};
use crate::windows::WindowSpec;

pub use first_order::{first_order_allpass_process, AllpassBaselineConfig, AlphaVariation, FirstOrderAllpass};
pub use scal::{
    check_stability, comb_allpass_process, next_alpha, scal_frame_filter, scal_process, scal_transfer,
    AllpassMode, ScalConfig, ScalFrameState, ScalProcessor,
};
pub use smoothed_abs::{smoothed_abs_process, SmoothedAbs, SmoothedAbsConfig};

/// A streaming single-channel processor.
pub trait Decorrelator: Send {
    fn process(&mut self, input: &[f64], output: &mut [f64]) -> Result<()>;

    /// Nominal delay of the processed signal, in samples.
    fn latency(&self) -> usize;
}

pub(crate) fn check_lengths(input: &[f64], output: &[f64]) -> Result<()> {
    if input.len() != output.len() {
        return Err(Error::Contract(format!(
            "input has {} samples but output has {}",
            input.len(),
            output.len()
        )));
    }
    Ok(())
}

/// Passes samples through unchanged.
pub struct Passthrough;

impl Decorrelator for Passthrough {
    fn process(&mut self, input: &[f64], output: &mut [f64]) -> Result<()> {
        check_lengths(input, output)?;
        output.copy_from_slice(input);
        Ok(())
    }

    fn latency(&self) -> usize {
        0
    }
}

/// Comb-allpass parameters: SCAL without tilt and with a fixed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CombAllpassConfig {
    pub order: usize,
    pub r_max: f64,
    pub epsilon: f64,
    pub alpha_init: f64,
    pub mode: AllpassMode,
    pub window: WindowSpec,
    pub seed: u64,
}

impl Default for CombAllpassConfig {
    fn default() -> Self {
        let s = ScalConfig::default();
        Self {
            order: 7,
            r_max: s.r_max,
            epsilon: s.epsilon,
            alpha_init: s.alpha_init,
            mode: s.mode,
            window: s.window,
            seed: 0,
        }
    }
}

impl CombAllpassConfig {
    pub fn to_scal(&self) -> ScalConfig {
        ScalConfig {
            beta: 0.0,
            n_min: self.order,
            n_max: self.order,
            r_max: self.r_max,
            epsilon: self.epsilon,
            alpha_init: self.alpha_init,
            mode: self.mode,
            window: self.window,
            seed: self.seed,
        }
    }
}

/// Any of the supported decorrelation chains.
///
/// The two comb-allpass variants may be followed by masked-noise injection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecorrelatorConfig {
    None,
    Scal {
        #[serde(default)]
        scal: ScalConfig,
        #[serde(default)]
        noise: Option<NoiseInjectorConfig>,
    },
    CombAllpass {
        #[serde(default)]
        comb: CombAllpassConfig,
        #[serde(default)]
        noise: Option<NoiseInjectorConfig>,
    },
    FirstOrderAllpass {
        #[serde(default)]
        allpass: AllpassBaselineConfig,
    },
    SmoothedAbs {
        #[serde(default)]
        smoothed: SmoothedAbsConfig,
    },
    /// Masked-noise injection alone.
    Noise {
        #[serde(default)]
        noise: NoiseInjectorConfig,
    },
}

impl DecorrelatorConfig {
    /// The full proposed chain with default parameters.
    pub fn proposed() -> Self {
        DecorrelatorConfig::Scal { scal: ScalConfig::default(), noise: Some(NoiseInjectorConfig::default()) }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DecorrelatorConfig::None => "none",
            DecorrelatorConfig::Scal { .. } => "scal",
            DecorrelatorConfig::CombAllpass { .. } => "comb_allpass",
            DecorrelatorConfig::FirstOrderAllpass { .. } => "first_order_allpass",
            DecorrelatorConfig::SmoothedAbs { .. } => "smoothed_abs",
            DecorrelatorConfig::Noise { .. } => "noise",
        }
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let check_noise = |n: &Option<NoiseInjectorConfig>| n.as_ref().map_or(Ok(()), |n| n.validate(sample_rate));
        match self {
            DecorrelatorConfig::None => Ok(()),
            DecorrelatorConfig::Scal { scal, noise } => scal.validate().and_then(|_| check_noise(noise)),
            DecorrelatorConfig::CombAllpass { comb, noise } => {
                comb.to_scal().validate().and_then(|_| check_noise(noise))
            }
            DecorrelatorConfig::FirstOrderAllpass { allpass } => allpass.validate(),
            DecorrelatorConfig::SmoothedAbs { smoothed } => smoothed.validate(),
            DecorrelatorConfig::Noise { noise } => noise.validate(sample_rate),
        }
    }

    /// Builds the processor for channel `channel` of a stream seeded by `master_seed`.
    ///
    /// Seeds inside the config are replaced by values derived from
    /// `master_seed` and the channel index. The smoothed absolute value
    /// alternates its sign by channel parity.
    pub fn build(&self, sample_rate: u32, master_seed: u64, channel: usize) -> Result<Box<dyn Decorrelator>> {
        Ok(match self.build_parts(sample_rate, master_seed, channel)? {
            (first, Some(noise)) => Box::new(Chain { first, second: Box::new(noise), scratch: Vec::new() }),
            (first, None) => first,
        })
    }

    /// As [`build`](Self::build), with the noise stage (if any) returned
    /// separately so it can be inspected.
    pub fn build_parts(
        &self,
        sample_rate: u32,
        master_seed: u64,
        channel: usize,
    ) -> Result<(Box<dyn Decorrelator>, Option<NoiseInjector>)> {
        self.validate(sample_rate)?;
        let seed = channel_seed(master_seed, channel);
        let noise_seed = derive_seed(seed, "noise");
        let injector = |n: &NoiseInjectorConfig| NoiseInjector::new(NoiseInjectorConfig { seed: noise_seed, ..n.clone() }, sample_rate);
        let optional = |n: &Option<NoiseInjectorConfig>| n.as_ref().map(injector).transpose();
        Ok(match self {
            DecorrelatorConfig::None => (Box::new(Passthrough), None),
            DecorrelatorConfig::Scal { scal, noise } => {
                (Box::new(ScalProcessor::new(ScalConfig { seed, ..scal.clone() })?), optional(noise)?)
            }
            DecorrelatorConfig::CombAllpass { comb, noise } => {
                (Box::new(ScalProcessor::new(ScalConfig { seed, ..comb.to_scal() })?), optional(noise)?)
            }
            DecorrelatorConfig::FirstOrderAllpass { allpass } => {
                (Box::new(FirstOrderAllpass::new(AllpassBaselineConfig { seed, ..allpass.clone() })?), None)
            }
            DecorrelatorConfig::SmoothedAbs { smoothed } => {
                let sign = if channel % 2 == 0 { 1.0 } else { -1.0 };
                (Box::new(SmoothedAbs::new(SmoothedAbsConfig { channel_sign: sign, ..smoothed.clone() })?), None)
            }
            DecorrelatorConfig::Noise { noise } => (Box::new(Passthrough), Some(injector(noise)?)),
        })
    }
}

struct Chain {
    first: Box<dyn Decorrelator>,
    second: Box<dyn Decorrelator>,
    scratch: Vec<f64>,
}

impl Decorrelator for Chain {
    fn process(&mut self, input: &[f64], output: &mut [f64]) -> Result<()> {
        check_lengths(input, output)?;
        self.scratch.resize(input.len(), 0.0);
        self.first.process(input, &mut self.scratch)?;
        self.second.process(&self.scratch, output)
    }

    fn latency(&self) -> usize {
        self.first.latency() + self.second.latency()
    }
}

/// Processes every channel of `input` with its own instance of `cfg`.
pub fn process_buffer(cfg: &DecorrelatorConfig, input: &AudioBuffer, master_seed: u64) -> Result<AudioBuffer> {
    let sr = input.sample_rate();
    let channels = input
        .channels()
        .iter()
        .enumerate()
        .map(|(i, ch)| {
            let mut proc = cfg.build(sr, master_seed, i)?;
            let mut out = vec![0.0; ch.len()];
            proc.process(ch, &mut out)?;
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    AudioBuffer::new(channels, sr)
}
