//! Stereo channel decorrelation for acoustic echo cancellation.
//!
//! The main processor is a time-varying comb allpass with a spectral tilt
//! (`decorrelators::scal`), optionally followed by noise shaped to stay
//! below the masking threshold (`psynoise`). Baselines, coherence and
//! misalignment measurement (`analysis`) and a stereo echo-cancellation
//! simulation (`aecsim`) are provided for evaluation.

// Range checks are written as `!(x > lo)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aecsim;
pub mod analysis;
pub mod buffer;
pub mod cli;
pub mod decorrelators;
pub mod error;
pub mod psynoise;
pub mod seed;
pub mod wav;
pub mod windows;

pub use buffer::AudioBuffer;
pub use decorrelators::{Decorrelator, DecorrelatorConfig, ScalConfig, ScalProcessor};
pub use error::{Error, Result};
pub use psynoise::{NoiseInjector, NoiseInjectorConfig};
pub use windows::WindowSpec;
