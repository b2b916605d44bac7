//! Shaped comb-allpass (SCAL) decorrelator.
//!
//! Each WOLA frame gets its own filter
//!
//! ```text
//!          −α + αβ z⁻¹ + z⁻ᴺ
//! A(z) = ───────────────────────   (flat mode)
//!         1 + αβ z⁻ᴺ⁺¹ − α z⁻ᴺ
//! ```
//!
//! with depth α following a clamped random walk from frame to frame and
//! order N redrawn uniformly for every frame. The filter output is delayed
//! by `n_max − N` so every frame has the same nominal delay of `n_max`
//! samples; the synthesis window is delayed by the same amount.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::decorrelators::response::SparseTransfer;
use crate::decorrelators::Decorrelator;
use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, Rng};
use crate::windows::{FrameFilter, FrameTransform, WindowSpec, WolaState};

/// Which numerator sign convention the filter uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AllpassMode {
    /// Numerator is the reversed denominator: `|A(e^{jω})| = 1`.
    #[default]
    Flat,
    /// Numerator `α(1 − βz⁻¹) + z⁻ᴺ` as commonly printed; not magnitude-flat.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalConfig {
    pub beta: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub r_max: f64,
    pub epsilon: f64,
    pub alpha_init: f64,
    pub mode: AllpassMode,
    pub window: WindowSpec,
    pub seed: u64,
}

impl Default for ScalConfig {
    fn default() -> Self {
        Self {
            beta: 0.43,
            n_min: 5,
            n_max: 10,
            r_max: 0.6,
            epsilon: 0.01,
            alpha_init: 0.0,
            mode: AllpassMode::Flat,
            window: WindowSpec::default(),
            seed: 0,
        }
    }
}

impl ScalConfig {
    /// The unshaped, fixed-order comb-allpass baseline.
    pub fn comb_allpass(order: usize) -> Self {
        Self { beta: 0.0, n_min: order, n_max: order, ..Self::default() }
    }

    /// Upper bound on |α| implied by the stability margin.
    pub fn alpha_max(&self) -> f64 {
        (1.0 - self.epsilon) / (1.0 + self.beta.abs())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.abs() < 1.0) {
            return Err(Error::config(format!("|beta| must be < 1, got {}", self.beta)));
        }
        if self.n_min < 1 || self.n_min > self.n_max {
            return Err(Error::config(format!(
                "need 1 <= n_min <= n_max, got n_min={} n_max={}",
                self.n_min, self.n_max
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::config(format!("epsilon must be in (0, 0.5), got {}", self.epsilon)));
        }
        if !(self.r_max >= 0.0 && self.r_max.is_finite()) {
            return Err(Error::config(format!("r_max must be finite and >= 0, got {}", self.r_max)));
        }
        if !(self.alpha_init.abs() <= self.alpha_max()) {
            return Err(Error::config(format!(
                "|alpha_init| must not exceed (1-epsilon)/(1+|beta|) = {:.6}, got {}",
                self.alpha_max(),
                self.alpha_init
            )));
        }
        self.window.validate()?;
        if self.n_max >= self.window.length {
            return Err(Error::config(format!(
                "n_max ({}) must be smaller than the window length ({})",
                self.n_max, self.window.length
            )));
        }
        Ok(())
    }
}

/// Sufficient stability condition `|α|(1 + |β|) < 1`.
pub fn check_stability(alpha: f64, beta: f64) -> bool {
    alpha.abs() * (1.0 + beta.abs()) < 1.0
}

/// One step of the depth random walk, clamped to `±(1−ε)/(1+|β|)`.
pub fn next_alpha(prev: f64, step: f64, beta: f64, epsilon: f64) -> f64 {
    let bound = (1.0 - epsilon) / (1.0 + beta.abs());
    (prev + step).min(bound).max(-bound)
}

/// Per-stream SCAL state carried from frame to frame.
#[derive(Debug, Clone)]
pub struct ScalFrameState {
    pub alpha: f64,
    pub order: usize,
    rng: Rng,
}

impl ScalFrameState {
    pub fn new(cfg: &ScalConfig) -> Self {
        Self { alpha: cfg.alpha_init, order: cfg.n_max, rng: rng_from_seed(cfg.seed) }
    }

    /// Draws `r₀ ∈ [−r_max, r_max]` and advances α.
    pub fn update_alpha(&mut self, cfg: &ScalConfig) -> f64 {
        let step = if cfg.r_max > 0.0 { self.rng.gen_range(-cfg.r_max..=cfg.r_max) } else { 0.0 };
        self.alpha = next_alpha(self.alpha, step, cfg.beta, cfg.epsilon);
        self.alpha
    }

    /// Draws a new order uniformly from `[n_min, n_max]`.
    pub fn update_order(&mut self, cfg: &ScalConfig) -> usize {
        self.order = self.rng.gen_range(cfg.n_min..=cfg.n_max);
        self.order
    }
}

/// Transfer function of one frame filter, without the alignment delay.
pub fn scal_transfer(alpha: f64, beta: f64, order: usize, mode: AllpassMode) -> SparseTransfer {
    let lead = match mode {
        AllpassMode::Flat => -alpha,
        AllpassMode::Literal => alpha,
    };
    let mut num = vec![(0, lead), (1, -lead * beta), (order, 1.0)];
    let mut den = vec![(order - 1, alpha * beta), (order, -alpha)];
    if order == 1 {
        // z⁻ᴺ⁺¹ collapses onto the leading denominator term; normalize.
        num = vec![(0, lead), (1, -lead * beta + 1.0)];
        let a0 = 1.0 + alpha * beta;
        num.iter_mut().for_each(|t| t.1 /= a0);
        den = vec![(1, -alpha / a0)];
    }
    SparseTransfer { num, den }
}

/// Sparse direct-form IIR with zero initial state.
#[derive(Debug, Clone)]
pub struct SparseIir {
    num: Vec<(usize, f64)>,
    den: Vec<(usize, f64)>,
    x_hist: Vec<f64>,
    y_hist: Vec<f64>,
    pos: usize,
}

impl SparseIir {
    pub fn new(transfer: SparseTransfer, extra_delay: usize) -> Self {
        let num: Vec<_> = transfer.num.into_iter().map(|(k, c)| (k + extra_delay, c)).collect();
        let span = num
            .iter()
            .chain(transfer.den.iter())
            .map(|&(k, _)| k)
            .max()
            .unwrap_or(0)
            + 1;
        Self { num, den: transfer.den, x_hist: vec![0.0; span], y_hist: vec![0.0; span], pos: 0 }
    }
}

impl FrameFilter for SparseIir {
    #[inline]
    fn tick(&mut self, x: f64) -> f64 {
        let span = self.x_hist.len();
        let pos = self.pos;
        self.x_hist[pos] = x;
        let at = |k: usize| (pos + span - k) % span;
        let mut acc = 0.0;
        for &(k, c) in &self.num {
            acc += c * self.x_hist[at(k)];
        }
        for &(k, c) in &self.den {
            acc -= c * self.y_hist[at(k)];
        }
        self.y_hist[pos] = acc;
        self.pos = (pos + 1) % span;
        acc
    }
}

/// Filters one frame from zero state.
pub fn scal_frame_filter(
    frame: &[f64],
    alpha: f64,
    beta: f64,
    order: usize,
    mode: AllpassMode,
) -> Result<Vec<f64>> {
    if !check_stability(alpha, beta) {
        return Err(Error::config(format!(
            "unstable coefficients: |alpha|(1+|beta|) = {:.6} >= 1",
            alpha.abs() * (1.0 + beta.abs())
        )));
    }
    if order == 0 || order >= frame.len() {
        return Err(Error::config(format!(
            "filter order must be in [1, frame length), got {order} for {} samples",
            frame.len()
        )));
    }
    let mut filt = SparseIir::new(scal_transfer(alpha, beta, order, mode), 0);
    Ok(frame.iter().map(|&x| filt.tick(x)).collect())
}

/// Frame-level parameter source for the WOLA engine.
#[derive(Debug, Clone)]
pub struct ScalFrames {
    cfg: ScalConfig,
    state: ScalFrameState,
}

impl ScalFrames {
    pub fn state(&self) -> &ScalFrameState {
        &self.state
    }
}

impl FrameTransform for ScalFrames {
    type Filter = SparseIir;

    fn begin_frame(&mut self, frame_index: u64) -> SparseIir {
        if frame_index > 0 {
            self.state.update_alpha(&self.cfg);
        }
        let order = self.state.update_order(&self.cfg);
        let transfer = scal_transfer(self.state.alpha, self.cfg.beta, order, self.cfg.mode);
        SparseIir::new(transfer, self.cfg.n_max - order)
    }
}

/// Streaming SCAL processor for one channel.
pub struct ScalProcessor {
    wola: WolaState<ScalFrames>,
    latency: usize,
}

impl ScalProcessor {
    pub fn new(cfg: ScalConfig) -> Result<Self> {
        cfg.validate()?;
        let latency = cfg.n_max;
        let frames = ScalFrames { state: ScalFrameState::new(&cfg), cfg: cfg.clone() };
        Ok(Self { wola: WolaState::new(cfg.window, latency, frames)?, latency })
    }

    pub fn frames(&self) -> &ScalFrames {
        self.wola.transform()
    }
}

impl Decorrelator for ScalProcessor {
    fn process(&mut self, input: &[f64], output: &mut [f64]) -> Result<()> {
        self.wola.process(input, output)
    }

    fn latency(&self) -> usize {
        self.latency
    }
}

/// Runs SCAL over a whole mono signal.
pub fn scal_process(cfg: &ScalConfig, input: &[f64]) -> Result<Vec<f64>> {
    let mut proc = ScalProcessor::new(cfg.clone())?;
    let mut out = vec![0.0; input.len()];
    proc.process(input, &mut out)?;
    Ok(out)
}

/// The comb-allpass baseline: SCAL with β = 0 and a fixed order.
pub fn comb_allpass_process(cfg: &ScalConfig, order: usize, input: &[f64]) -> Result<Vec<f64>> {
    let comb = ScalConfig { beta: 0.0, n_min: order, n_max: order, ..cfg.clone() };
    scal_process(&comb, input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stability_examples() {
        assert!(check_stability(0.4, 0.43));
        assert!(!check_stability(0.7, 0.5));
        assert!(check_stability(0.0, 0.99));
        assert!(check_stability(0.0, -5.0));
    }

    #[test]
    fn alpha_update_examples() {
        assert!((next_alpha(0.2, 0.3, 0.43, 0.01) - 0.5).abs() < 1e-12);
        let bound = 0.99 / 1.43;
        assert!((next_alpha(0.6, 0.5, 0.43, 0.01) - bound).abs() < 1e-12);
        assert!((bound - 0.6923).abs() < 1e-4);
        assert!((next_alpha(-0.5, -0.4, 0.43, 0.01) + bound).abs() < 1e-12);
    }

    #[test]
    fn zero_alpha_is_delay() {
        let mut impulse = vec![0.0; 32];
        impulse[0] = 1.0;
        for beta in [0.0, 0.43, -0.9] {
            let y = scal_frame_filter(&impulse, 0.0, beta, 7, AllpassMode::Flat).unwrap();
            for (n, v) in y.iter().enumerate() {
                assert_eq!(*v, if n == 7 { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn frame_filter_rejects_bad_input() {
        assert!(scal_frame_filter(&[0.0; 16], 0.7, 0.5, 4, AllpassMode::Flat).is_err());
        assert!(scal_frame_filter(&[0.0; 16], 0.1, 0.5, 16, AllpassMode::Flat).is_err());
    }

    #[test]
    fn order_one_is_still_allpass() {
        let t = scal_transfer(0.5, 0.4, 1, AllpassMode::Flat);
        assert!(t.max_magnitude_deviation(512) < 1e-12);
        let mut impulse = vec![0.0; 200];
        impulse[0] = 1.0;
        let y = scal_frame_filter(&impulse, 0.5, 0.4, 1, AllpassMode::Flat).unwrap();
        // Compare the recursion with the evaluated response at one frequency.
        let omega = 0.7f64;
        let dtft: num_complex::Complex64 = y
            .iter()
            .enumerate()
            .map(|(n, &v)| v * num_complex::Complex64::from_polar(1.0, -omega * n as f64))
            .sum();
        assert!((dtft - t.eval(omega)).norm() < 1e-9);
    }

    #[test]
    fn degenerate_order_range() {
        let cfg = ScalConfig { n_min: 7, n_max: 7, ..ScalConfig::default() };
        let mut st = ScalFrameState::new(&cfg);
        assert!((0..100).all(|_| st.update_order(&cfg) == 7));
    }

    #[test]
    fn config_validation() {
        assert!(ScalConfig::default().validate().is_ok());
        assert!(ScalConfig { beta: 1.5, ..Default::default() }.validate().is_err());
        assert!(ScalConfig { n_min: 11, ..Default::default() }.validate().is_err());
        assert!(ScalConfig { n_min: 0, ..Default::default() }.validate().is_err());
        assert!(ScalConfig { epsilon: 0.0, ..Default::default() }.validate().is_err());
        assert!(ScalConfig { alpha_init: 0.9, ..Default::default() }.validate().is_err());
        assert!(ScalConfig { r_max: f64::NAN, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn no_walk_no_depth_gives_nominal_delay() {
        let cfg = ScalConfig { r_max: 0.0, alpha_init: 0.0, window: WindowSpec::vorbis(256).unwrap(), ..Default::default() };
        let x: Vec<f64> = (0..5000).map(|n| ((n * 7919) % 113) as f64 / 113.0 - 0.5).collect();
        let y = scal_process(&cfg, &x).unwrap();
        for n in cfg.n_max..x.len() {
            assert!((y[n] - x[n - cfg.n_max]).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn alpha_walk_stays_stable(seed in any::<u64>(), beta in -0.99f64..0.99, r_max in 0.0f64..2.0) {
            let cfg = ScalConfig { beta, r_max, seed, ..Default::default() };
            let mut st = ScalFrameState::new(&cfg);
            for _ in 0..200 {
                let a = st.update_alpha(&cfg);
                prop_assert!(check_stability(a, beta));
                prop_assert!(a.abs() * (1.0 + beta.abs()) <= 1.0 - cfg.epsilon + 1e-12);
            }
        }
    }
}
