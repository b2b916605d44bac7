//! Time-varying first-order allpass baseline.
//!
//! `y(n) = α(n)·x(n) + x(n−1) − α(n)·y(n−1)`, with α(n) performing a
//! per-sample random walk reflected into `[α_min, 0]`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::decorrelators::Decorrelator;
use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlphaVariation {
    #[default]
    PerSampleRandomWalk,
    /// α held at `alpha_min`; a static allpass, used for checks.
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllpassBaselineConfig {
    pub alpha_min: f64,
    pub variation: AlphaVariation,
    /// Largest per-sample change of α.
    pub step: f64,
    pub seed: u64,
}

impl Default for AllpassBaselineConfig {
    fn default() -> Self {
        Self { alpha_min: -0.985, variation: AlphaVariation::PerSampleRandomWalk, step: 0.01, seed: 0 }
    }
}

impl AllpassBaselineConfig {
    pub fn validate(&self) -> Result<()> {
        match self.variation {
            AlphaVariation::PerSampleRandomWalk if !(self.alpha_min > -1.0 && self.alpha_min < 0.0) => {
                Err(Error::config(format!("alpha_min must be in (-1, 0), got {}", self.alpha_min)))
            }
            AlphaVariation::Constant if !(self.alpha_min.abs() < 1.0) => {
                Err(Error::config(format!("|alpha| must be < 1, got {}", self.alpha_min)))
            }
            _ if !(self.step >= 0.0 && self.step.is_finite()) => {
                Err(Error::config(format!("step must be finite and >= 0, got {}", self.step)))
            }
            _ => Ok(()),
        }
    }
}

pub struct FirstOrderAllpass {
    cfg: AllpassBaselineConfig,
    alpha: f64,
    x_prev: f64,
    y_prev: f64,
    rng: Rng,
}

impl FirstOrderAllpass {
    pub fn new(cfg: AllpassBaselineConfig) -> Result<Self> {
        cfg.validate()?;
        let alpha = match cfg.variation {
            AlphaVariation::PerSampleRandomWalk => 0.5 * cfg.alpha_min,
            AlphaVariation::Constant => cfg.alpha_min,
        };
        let rng = rng_from_seed(cfg.seed);
        Ok(Self { cfg, alpha, x_prev: 0.0, y_prev: 0.0, rng })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn advance_alpha(&mut self) {
        if self.cfg.variation == AlphaVariation::Constant || self.cfg.step == 0.0 {
            return;
        }
        let lo = self.cfg.alpha_min;
        let mut a = self.alpha + self.rng.gen_range(-self.cfg.step..=self.cfg.step);
        if a > 0.0 {
            a = -a;
        }
        if a < lo {
            a = 2.0 * lo - a;
        }
        self.alpha = a.clamp(lo, 0.0);
    }

    #[inline]
    pub fn tick(&mut self, x: f64) -> f64 {
        self.advance_alpha();
        let y = self.alpha * x + self.x_prev - self.alpha * self.y_prev;
        self.x_prev = x;
        self.y_prev = y;
        y
    }
}

impl Decorrelator for FirstOrderAllpass {
    fn process(&mut self, input: &[f64], output: &mut [f64]) -> Result<()> {
        super::check_lengths(input, output)?;
        for (o, &x) in output.iter_mut().zip(input) {
            *o = self.tick(x);
        }
        Ok(())
    }

    fn latency(&self) -> usize {
        1
    }
}

pub fn first_order_allpass_process(cfg: &AllpassBaselineConfig, input: &[f64]) -> Result<Vec<f64>> {
    let mut f = FirstOrderAllpass::new(cfg.clone())?;
    Ok(input.iter().map(|&x| f.tick(x)).collect())
}
