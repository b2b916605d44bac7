//! Objective metrics: squared inter-channel coherence and filter misalignment.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-bin squared coherence over `0..=fft_size/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSpectrum {
    pub gamma_sq: Vec<f64>,
    pub fft_size: usize,
    pub n_blocks_averaged: usize,
    pub sample_rate: u32,
}

impl CoherenceSpectrum {
    pub fn bin_hz(&self) -> f64 {
        self.sample_rate as f64 / self.fft_size as f64
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_hz()
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate as f64 / 2.0
    }

    /// Bins whose centre frequency lies in `[f_lo, f_hi)`; the Nyquist bin
    /// is included when `f_hi` reaches Nyquist.
    pub fn bins_in(&self, f_lo: f64, f_hi: f64) -> std::ops::Range<usize> {
        let hz = self.bin_hz();
        let lo = (f_lo / hz).ceil() as usize;
        let last = self.gamma_sq.len();
        let hi = if f_hi >= self.nyquist() { last } else { ((f_hi / hz).ceil() as usize).min(last) };
        lo.min(hi)..hi
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "frequency_hz,gamma_sq")?;
        for (k, g) in self.gamma_sq.iter().enumerate() {
            writeln!(w, "{:.3},{:.9}", self.frequency(k), g)?;
        }
        Ok(())
    }
}

fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()
}

/// Welch estimate of `|E{X₁*X₂}|² / (E{|X₁|²} E{|X₂|²})`.
///
/// Blocks are Hann-windowed, `fft_size` long, with 50% overlap. With
/// `n_blocks = Some(n)` exactly the first `n` blocks are used and the
/// signals must hold `(n + 1)·fft_size/2` samples; `None` uses every
/// complete block. Bins where either channel has zero power report 0.
pub fn coherence(
    x1: &[f64],
    x2: &[f64],
    sample_rate: u32,
    fft_size: usize,
    n_blocks: Option<usize>,
) -> Result<CoherenceSpectrum> {
    if x1.len() != x2.len() {
        return Err(Error::Contract(format!(
            "channels differ in length: {} vs {}",
            x1.len(),
            x2.len()
        )));
    }
    if fft_size < 4 || fft_size % 2 != 0 {
        return Err(Error::config(format!("fft_size must be even and >= 4, got {fft_size}")));
    }
    let hop = fft_size / 2;
    let available = if x1.len() >= fft_size { (x1.len() - fft_size) / hop + 1 } else { 0 };
    let blocks = match n_blocks {
        Some(n) if n < 2 => return Err(Error::config("coherence needs at least 2 averaged blocks")),
        Some(n) => n,
        None => available,
    };
    let needed = (blocks.max(2) + 1) * hop;
    if blocks > available || blocks < 2 {
        return Err(Error::InsufficientData { needed, got: x1.len() });
    }

    let window = hann(fft_size);
    let fft = FftPlanner::new().plan_fft_forward(fft_size);
    let n_bins = fft_size / 2 + 1;
    let mut s11 = vec![0.0; n_bins];
    let mut s22 = vec![0.0; n_bins];
    let mut s12 = vec![Complex64::new(0.0, 0.0); n_bins];
    let mut a = vec![Complex64::new(0.0, 0.0); fft_size];
    let mut b = vec![Complex64::new(0.0, 0.0); fft_size];
    for blk in 0..blocks {
        let start = blk * hop;
        for i in 0..fft_size {
            a[i] = Complex64::new(x1[start + i] * window[i], 0.0);
            b[i] = Complex64::new(x2[start + i] * window[i], 0.0);
        }
        fft.process(&mut a);
        fft.process(&mut b);
        for k in 0..n_bins {
            s11[k] += a[k].norm_sqr();
            s22[k] += b[k].norm_sqr();
            s12[k] += a[k].conj() * b[k];
        }
    }
    let gamma_sq = (0..n_bins)
        .map(|k| {
            let den = s11[k] * s22[k];
            if den > 0.0 {
                (s12[k].norm_sqr() / den).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(CoherenceSpectrum { gamma_sq, fft_size, n_blocks_averaged: blocks, sample_rate })
}

/// Unweighted mean of γ² over `[f_lo, f_hi)`.
pub fn band_average_coherence(spec: &CoherenceSpectrum, f_lo: f64, f_hi: f64) -> Result<f64> {
    if !(f_lo >= 0.0 && f_lo < f_hi && f_hi <= spec.nyquist()) {
        return Err(Error::config(format!(
            "band must satisfy 0 <= f_lo < f_hi <= {}, got [{f_lo}, {f_hi})",
            spec.nyquist()
        )));
    }
    let bins = spec.bins_in(f_lo, f_hi);
    if bins.is_empty() {
        return Err(Error::config(format!("band [{f_lo}, {f_hi}) Hz contains no bins")));
    }
    let n = bins.len() as f64;
    Ok(spec.gamma_sq[bins].iter().sum::<f64>() / n)
}

/// Reported value when the estimate matches the truth exactly.
pub const MISALIGNMENT_FLOOR_DB: f64 = -200.0;

/// `10·log10(‖h − ĥ‖² / ‖h‖²)`, zero-padding the shorter vector.
pub fn misalignment_db(h_true: &[f64], h_est: &[f64]) -> Result<f64> {
    let energy: f64 = h_true.iter().map(|v| v * v).sum();
    if energy <= 0.0 || !energy.is_finite() {
        return Err(Error::config("true impulse response must have finite nonzero energy"));
    }
    let n = h_true.len().max(h_est.len());
    let err: f64 = (0..n)
        .map(|i| {
            let d = h_true.get(i).copied().unwrap_or(0.0) - h_est.get(i).copied().unwrap_or(0.0);
            d * d
        })
        .sum();
    let db = 10.0 * (err / energy).log10();
    if db.is_nan() {
        return Err(Error::NonFinite("misalignment".into()));
    }
    Ok(db.max(MISALIGNMENT_FLOOR_DB))
}

/// Misalignment over several channels, concatenated.
pub fn misalignment_db_multi(h_true: &[Vec<f64>], h_est: &[Vec<f64>]) -> Result<f64> {
    if h_true.len() != h_est.len() {
        return Err(Error::Contract("channel count mismatch in misalignment".into()));
    }
    let mut t = Vec::new();
    let mut e = Vec::new();
    for (a, b) in h_true.iter().zip(h_est) {
        let n = a.len().max(b.len());
        t.extend((0..n).map(|i| a.get(i).copied().unwrap_or(0.0)));
        e.extend((0..n).map(|i| b.get(i).copied().unwrap_or(0.0)));
    }
    misalignment_db(&t, &e)
}

/// Normalized misalignment over time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MisalignmentTrace {
    pub eta_db: Vec<f64>,
    pub times: Vec<f64>,
    pub filter_length: usize,
}

impl MisalignmentTrace {
    pub fn final_db(&self) -> Option<f64> {
        self.eta_db.last().copied()
    }

    /// `1/η` (linear) for each point, the "higher is better" view.
    pub fn inverse_linear(&self) -> Vec<f64> {
        self.eta_db.iter().map(|d| 10f64.powf(-d / 10.0)).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "time_s,eta_db")?;
        for (t, e) in self.times.iter().zip(&self.eta_db) {
            writeln!(w, "{t:.3},{e:.6}")?;
        }
        Ok(())
    }
}

/// Spearman rank correlation (average ranks for ties).
pub fn rank_correlation(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}
