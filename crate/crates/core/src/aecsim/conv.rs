use num_complex::Complex64;
use rustfft::FftPlanner;

/// Linear convolution `x ⊛ h`, truncated to `x.len()` samples.
///
/// Short filters use the direct sum; longer ones use FFT overlap-add.
pub fn convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    if h.is_empty() || x.is_empty() {
        return vec![0.0; x.len()];
    }
    if h.len() <= 64 {
        return (0..x.len())
            .map(|n| h.iter().enumerate().take(n + 1).map(|(k, &c)| c * x[n - k]).sum())
            .collect();
    }
    let block = h.len().next_power_of_two().max(1024);
    let n_fft = 2 * block.max(h.len());
    let n_fft = n_fft.next_power_of_two();
    let step = n_fft - h.len() + 1;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n_fft);
    let inv = planner.plan_fft_inverse(n_fft);
    let mut hf: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    hf.resize(n_fft, Complex64::new(0.0, 0.0));
    fwd.process(&mut hf);
    let scale = 1.0 / n_fft as f64;
    let mut out = vec![0.0; x.len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    let mut start = 0;
    while start < x.len() {
        let end = (start + step).min(x.len());
        buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for (b, &v) in buf.iter_mut().zip(&x[start..end]) {
            b.re = v;
        }
        fwd.process(&mut buf);
        for (b, hh) in buf.iter_mut().zip(&hf) {
            *b *= hh;
        }
        inv.process(&mut buf);
        for (i, b) in buf.iter().enumerate() {
            let t = start + i;
            if t >= x.len() {
                break;
            }
            out[t] += b.re * scale;
        }
        start = end;
    }
    out
}
