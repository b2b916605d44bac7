//! Multichannel multidelay block frequency-domain adaptive filter.
//!
//! Constrained overlap-save with `M = filter_length / block_size`
//! partitions per far-end channel. All channels share one error signal.
//! The update of each bin is normalized by the far-end power held in the
//! partition history summed over channels, which makes `learning_rate`
//! play the role of the NLMS step size.

use std::collections::VecDeque;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MdfConfig {
    pub filter_length_taps: usize,
    pub block_size: usize,
    pub learning_rate: f64,
    /// Power floor of the normalization, as an equivalent per-sample
    /// far-end variance.
    pub regularization: f64,
    /// Fraction of the mean bin power added to every bin before
    /// normalizing. Keeps weak bins (spectral valleys, speech pauses) from
    /// taking steps driven by background noise; 0 gives pure per-bin
    /// normalization, large values approach a broadband NLMS step.
    pub spectral_floor: f64,
}

impl Default for MdfConfig {
    fn default() -> Self {
        Self { filter_length_taps: 1024, block_size: 256, learning_rate: 0.5, regularization: 1e-6, spectral_floor: 0.3 }
    }
}

impl MdfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block_size == 0 || self.filter_length_taps == 0 || self.filter_length_taps % self.block_size != 0 {
            return Err(Error::config(format!(
                "filter length ({}) must be a positive multiple of the block size ({})",
                self.filter_length_taps, self.block_size
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::config(format!("learning_rate must be in (0, 1], got {}", self.learning_rate)));
        }
        if !(self.regularization > 0.0 && self.regularization.is_finite()) {
            return Err(Error::config(format!("regularization must be positive, got {}", self.regularization)));
        }
        if !(self.spectral_floor >= 0.0 && self.spectral_floor.is_finite()) {
            return Err(Error::config(format!("spectral_floor must be non-negative, got {}", self.spectral_floor)));
        }
        Ok(())
    }

    pub fn partitions(&self) -> usize {
        self.filter_length_taps / self.block_size
    }
}

pub struct MdfFilter {
    cfg: MdfConfig,
    n_channels: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// Last `2B` far-end samples per channel.
    far: Vec<Vec<f64>>,
    /// Input spectra per channel, newest first.
    history: Vec<VecDeque<Vec<Complex64>>>,
    /// Weights per channel and partition.
    weights: Vec<Vec<Vec<Complex64>>>,
    scratch: Vec<Complex64>,
}

impl MdfFilter {
    pub fn new(cfg: MdfConfig, n_channels: usize) -> Result<Self> {
        cfg.validate()?;
        if n_channels == 0 {
            return Err(Error::config("MDF needs at least one far-end channel"));
        }
        let n = 2 * cfg.block_size;
        let m = cfg.partitions();
        let mut planner = FftPlanner::new();
        let zero = vec![Complex64::new(0.0, 0.0); n];
        Ok(Self {
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
            far: vec![vec![0.0; n]; n_channels],
            history: vec![VecDeque::from(vec![zero.clone(); m]); n_channels],
            weights: vec![vec![zero.clone(); m]; n_channels],
            scratch: zero,
            n_channels,
            cfg,
        })
    }

    pub fn config(&self) -> &MdfConfig {
        &self.cfg
    }

    /// Processes one block. `far[c]` and `mic` hold `block_size` samples;
    /// returns the error (echo-cancelled) signal.
    pub fn process_block(&mut self, far: &[&[f64]], mic: &[f64]) -> Result<Vec<f64>> {
        let b = self.cfg.block_size;
        let n = 2 * b;
        let m_parts = self.cfg.partitions();
        if far.len() != self.n_channels || mic.len() != b || far.iter().any(|f| f.len() != b) {
            return Err(Error::Contract(format!("MDF expects {} channels of {b} samples", self.n_channels)));
        }
        for (c, block) in far.iter().enumerate() {
            let buf = &mut self.far[c];
            buf.copy_within(b.., 0);
            buf[b..].copy_from_slice(block);
            let mut spec: Vec<Complex64> = buf.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            self.fft.process(&mut spec);
            let hist = &mut self.history[c];
            hist.pop_back();
            hist.push_front(spec);
        }

        // Echo estimate.
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..self.n_channels {
            for (w, x) in self.weights[c].iter().zip(&self.history[c]) {
                for k in 0..n {
                    y[k] += w[k] * x[k];
                }
            }
        }
        self.ifft.process(&mut y);
        let scale = 1.0 / n as f64;
        let err: Vec<f64> = mic.iter().zip(&y[b..]).map(|(d, yy)| d - yy.re * scale).collect();

        let mut e_spec = vec![Complex64::new(0.0, 0.0); n];
        for (slot, &e) in e_spec[b..].iter_mut().zip(&err) {
            slot.re = e;
        }
        self.fft.process(&mut e_spec);

        // Per-bin normalization: half the history power summed over channels.
        let floor = self.cfg.regularization * n as f64 * m_parts as f64;
        let mut norm = vec![floor; n];
        for hist in &self.history {
            for x in hist {
                for k in 0..n {
                    norm[k] += 0.5 * x[k].norm_sqr();
                }
            }
        }
        let mean = norm.iter().sum::<f64>() / n as f64;
        norm.iter_mut().for_each(|v| *v += self.cfg.spectral_floor * mean);
        let mu = self.cfg.learning_rate;
        let grad_scale: Vec<Complex64> = (0..n).map(|k| e_spec[k] * (mu / norm[k])).collect();

        for c in 0..self.n_channels {
            for (w, x) in self.weights[c].iter_mut().zip(&self.history[c]) {
                for k in 0..n {
                    self.scratch[k] = x[k].conj() * grad_scale[k];
                }
                // Gradient constraint: keep only the first B lags.
                self.ifft.process(&mut self.scratch);
                for v in self.scratch[b..].iter_mut() {
                    *v = Complex64::new(0.0, 0.0);
                }
                for v in self.scratch[..b].iter_mut() {
                    *v = Complex64::new(v.re * scale, 0.0);
                }
                self.fft.process(&mut self.scratch);
                for (wk, g) in w.iter_mut().zip(&self.scratch) {
                    *wk += g;
                }
            }
        }
        if err.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("MDF error signal".into()));
        }
        Ok(err)
    }

    /// Time-domain taps per channel, `filter_length_taps` each.
    pub fn impulse_responses(&self) -> Vec<Vec<f64>> {
        let b = self.cfg.block_size;
        let n = 2 * b;
        let scale = 1.0 / n as f64;
        self.weights
            .iter()
            .map(|parts| {
                let mut taps = Vec::with_capacity(self.cfg.filter_length_taps);
                for w in parts {
                    let mut t = w.clone();
                    self.ifft.process(&mut t);
                    taps.extend(t[..b].iter().map(|v| v.re * scale));
                }
                taps
            })
            .collect()
    }

    pub fn weight_norm(&self) -> f64 {
        self.impulse_responses().iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }
}
