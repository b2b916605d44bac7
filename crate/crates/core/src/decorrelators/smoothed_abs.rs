//! Smoothed absolute-value nonlinearity: `y = x + sign·α_abs·(√(x² + δ²) − δ)`.

use serde::{Deserialize, Serialize};

use crate::decorrelators::Decorrelator;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothedAbsConfig {
    pub alpha_abs: f64,
    /// +1 for the left channel, −1 for the right.
    pub channel_sign: f64,
    pub smoothing_delta: f64,
}

impl Default for SmoothedAbsConfig {
    fn default() -> Self {
        Self { alpha_abs: 0.3, channel_sign: 1.0, smoothing_delta: 1e-3 }
    }
}

impl SmoothedAbsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha_abs) {
            return Err(Error::config(format!("alpha_abs must be in [0, 1), got {}", self.alpha_abs)));
        }
        if self.channel_sign != 1.0 && self.channel_sign != -1.0 {
            return Err(Error::config(format!("channel_sign must be +1 or -1, got {}", self.channel_sign)));
        }
        if !(self.smoothing_delta >= 0.0 && self.smoothing_delta.is_finite()) {
            return Err(Error::config(format!(
                "smoothing_delta must be finite and >= 0, got {}",
                self.smoothing_delta
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        let d = self.smoothing_delta;
        let smooth_abs = (x * x + d * d).sqrt() - d;
        x + self.channel_sign * self.alpha_abs * smooth_abs
    }
}

pub struct SmoothedAbs {
    cfg: SmoothedAbsConfig,
}

impl SmoothedAbs {
    pub fn new(cfg: SmoothedAbsConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }
}

impl Decorrelator for SmoothedAbs {
    fn process(&mut self, input: &[f64], output: &mut [f64]) -> Result<()> {
        super::check_lengths(input, output)?;
        for (o, &x) in output.iter_mut().zip(input) {
            *o = self.cfg.apply(x);
        }
        Ok(())
    }

    fn latency(&self) -> usize {
        0
    }
}

pub fn smoothed_abs_process(cfg: &SmoothedAbsConfig, input: &[f64]) -> Result<Vec<f64>> {
    cfg.validate()?;
    Ok(input.iter().map(|&x| cfg.apply(x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_maps_to_zero() {
        assert_eq!(SmoothedAbsConfig::default().apply(0.0), 0.0);
    }

    #[test]
    fn sharp_limit() {
        let cfg = SmoothedAbsConfig { smoothing_delta: 0.0, ..Default::default() };
        assert!((cfg.apply(-1.0) + 0.7).abs() < 1e-15);
        let right = SmoothedAbsConfig { channel_sign: -1.0, ..cfg };
        assert!((right.apply(-1.0) + 1.3).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(SmoothedAbsConfig { alpha_abs: 1.0, ..Default::default() }.validate().is_err());
        assert!(SmoothedAbsConfig { channel_sign: 0.5, ..Default::default() }.validate().is_err());
    }
}
