//! Power-complementary windows and the weighted overlap-add engine.
//!
//! Frames overlap by 50%. Each frame is multiplied by the analysis window,
//! run through a causal per-frame filter that starts from zero state, and
//! multiplied by the synthesis window (the same window, optionally delayed)
//! before being summed. Because the per-frame filter is causal and runs
//! sample by sample, the engine never needs input beyond the current
//! sample: it adds no latency of its own.

use std::collections::VecDeque;
use std::f64::consts::FRAC_PI_2;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    #[default]
    Vorbis,
}

/// Window length and shape. The hop is always half the length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub length: usize,
    #[serde(default)]
    pub kind: WindowKind,
}

impl WindowSpec {
    pub const DEFAULT_LENGTH: usize = 1024;

    pub fn vorbis(length: usize) -> Result<Self> {
        let spec = Self { length, kind: WindowKind::Vorbis };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 4 || self.length % 2 != 0 {
            return Err(Error::config(format!(
                "window length must be even and at least 4, got {}",
                self.length
            )));
        }
        Ok(())
    }

    pub fn hop(&self) -> usize {
        self.length / 2
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self { length: Self::DEFAULT_LENGTH, kind: WindowKind::Vorbis }
    }
}

/// Evaluates the window described by `spec`.
///
/// The Vorbis window `w(n) = sin(π/2 · sin²(π(n + ½)/L))` satisfies
/// `w²(n) + w²(n + L/2) = 1`.
pub fn make_window(spec: &WindowSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let len = spec.length as f64;
    Ok(match spec.kind {
        WindowKind::Vorbis => (0..spec.length)
            .map(|n| {
                let s = (PI * (n as f64 + 0.5) / len).sin();
                (FRAC_PI_2 * s * s).sin()
            })
            .collect(),
    })
}

/// A causal filter that lives for exactly one frame.
pub trait FrameFilter {
    fn tick(&mut self, x: f64) -> f64;
}

impl<F: FnMut(f64) -> f64> FrameFilter for F {
    fn tick(&mut self, x: f64) -> f64 {
        self(x)
    }
}

/// Produces a fresh filter for every new frame.
pub trait FrameTransform {
    type Filter: FrameFilter;

    fn begin_frame(&mut self, frame_index: u64) -> Self::Filter;
}

/// Adapts a closure `frame_index -> filter` into a [`FrameTransform`].
pub struct FromFn<G>(pub G);

impl<G, F> FrameTransform for FromFn<G>
where
    G: FnMut(u64) -> F,
    F: FrameFilter,
{
    type Filter = F;

    fn begin_frame(&mut self, frame_index: u64) -> F {
        (self.0)(frame_index)
    }
}

struct LiveFrame<F> {
    /// Absolute sample time of the first analysis-window sample.
    start: i64,
    filter: F,
}

/// Streaming WOLA state for one channel.
///
/// The first frame starts half a window before the stream, fed with
/// silence, so every output sample is covered by two synthesis windows.
pub struct WolaState<T: FrameTransform> {
    window: Vec<f64>,
    spec: WindowSpec,
    synthesis_delay: usize,
    transform: T,
    frames: VecDeque<LiveFrame<T::Filter>>,
    time: i64,
    frame_index: u64,
}

impl<T: FrameTransform> WolaState<T> {
    /// `synthesis_delay` shifts the synthesis window relative to the
    /// analysis window; set it to the group delay of the per-frame filter
    /// so the window pair stays power-complementary at the output.
    pub fn new(spec: WindowSpec, synthesis_delay: usize, transform: T) -> Result<Self> {
        let window = make_window(&spec)?;
        let mut state = Self {
            window,
            spec,
            synthesis_delay,
            transform,
            frames: VecDeque::new(),
            time: 0,
            frame_index: 0,
        };
        state.spawn_frame(-(spec.hop() as i64));
        // Bring the pre-roll frame up to time zero on silence.
        let hop = spec.hop();
        let front = state.frames.back_mut().expect("frame just spawned");
        for _ in 0..hop {
            front.filter.tick(0.0);
        }
        Ok(state)
    }

    fn spawn_frame(&mut self, start: i64) {
        let filter = self.transform.begin_frame(self.frame_index);
        self.frame_index += 1;
        self.frames.push_back(LiveFrame { start, filter });
    }

    pub fn window_spec(&self) -> &WindowSpec {
        &self.spec
    }

    pub fn transform(&self) -> &T {
        &self.transform
    }

    pub fn transform_mut(&mut self) -> &mut T {
        &mut self.transform
    }

    /// Number of frames begun so far, including the pre-roll frame.
    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    /// Processes one sample.
    pub fn tick(&mut self, x: f64) -> f64 {
        let len = self.spec.length as i64;
        let hop = self.spec.hop() as i64;
        let delay = self.synthesis_delay as i64;
        let t = self.time;
        if t % hop == 0 {
            self.spawn_frame(t);
        }
        let mut out = 0.0;
        for frame in self.frames.iter_mut() {
            let n = t - frame.start;
            let a = if n < len { self.window[n as usize] * x } else { 0.0 };
            let y = frame.filter.tick(a);
            let m = n - delay;
            if (0..len).contains(&m) {
                out += self.window[m as usize] * y;
            }
        }
        while let Some(front) = self.frames.front() {
            if t - front.start - delay >= len - 1 {
                self.frames.pop_front();
            } else {
                break;
            }
        }
        self.time += 1;
        out
    }

    /// Processes a block in place-compatible fashion (`input.len() == output.len()`).
    pub fn process(&mut self, input: &[f64], output: &mut [f64]) -> Result<()> {
        if input.len() != output.len() {
            return Err(Error::Contract(format!(
                "input has {} samples but output has {}",
                input.len(),
                output.len()
            )));
        }
        for (o, &x) in output.iter_mut().zip(input) {
            *o = self.tick(x);
        }
        Ok(())
    }

    pub fn process_vec(&mut self, input: &[f64]) -> Vec<f64> {
        input.iter().map(|&x| self.tick(x)).collect()
    }
}

/// Offline WOLA with a whole-frame transform.
///
/// `transform` receives the analysis-windowed frame (length L) and must
/// return a frame of the same length. Frames are laid out exactly as in
/// [`WolaState`], so for a causal transform both paths agree.
pub fn wola_process<F>(spec: &WindowSpec, input: &[f64], mut transform: F) -> Result<Vec<f64>>
where
    F: FnMut(u64, &[f64]) -> Vec<f64>,
{
    let window = make_window(spec)?;
    let len = spec.length;
    let hop = spec.hop();
    let mut out = vec![0.0; input.len()];
    let mut frame = vec![0.0; len];
    let n_frames = input.len().div_ceil(hop) + 1;
    for k in 0..n_frames {
        let start = k as i64 * hop as i64 - hop as i64;
        for (n, slot) in frame.iter_mut().enumerate() {
            let t = start + n as i64;
            *slot = if t >= 0 && (t as usize) < input.len() {
                window[n] * input[t as usize]
            } else {
                0.0
            };
        }
        let y = transform(k as u64, &frame);
        if y.len() != len {
            return Err(Error::Contract(format!(
                "frame transform returned {} samples for a {len}-sample frame",
                y.len()
            )));
        }
        for (n, &v) in y.iter().enumerate() {
            let t = start + n as i64;
            if t >= 0 && (t as usize) < input.len() {
                out[t as usize] += window[n] * v;
            }
        }
    }
    Ok(out)
}
