//! Frequency-response evaluation for rational filters.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

/// A transfer function `B(z)/A(z)` stored as sparse `(delay, coefficient)`
/// pairs. `den` excludes the implicit leading 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTransfer {
    pub num: Vec<(usize, f64)>,
    pub den: Vec<(usize, f64)>,
}

impl SparseTransfer {
    /// `H(e^{jω})`.
    pub fn eval(&self, omega: f64) -> Complex64 {
        let poly = |taps: &[(usize, f64)], lead: f64| {
            taps.iter().fold(Complex64::new(lead, 0.0), |acc, &(k, c)| {
                acc + c * Complex64::from_polar(1.0, -omega * k as f64)
            })
        };
        let num = poly(&self.num, 0.0);
        let den = poly(&self.den, 1.0);
        num / den
    }

    /// Response at `n_bins` frequencies uniformly covering `[0, π]`.
    pub fn response(&self, n_bins: usize) -> Vec<ResponsePoint> {
        let denom = (n_bins.max(2) - 1) as f64;
        (0..n_bins)
            .map(|i| {
                let omega = PI * i as f64 / denom;
                let h = self.eval(omega);
                ResponsePoint { omega, magnitude: h.norm(), phase: h.arg() }
            })
            .collect()
    }

    /// Largest `| |H| − 1 |` over `n_bins` points in `[0, π]`.
    pub fn max_magnitude_deviation(&self, n_bins: usize) -> f64 {
        self.response(n_bins)
            .iter()
            .map(|p| (p.magnitude - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponsePoint {
    pub omega: f64,
    pub magnitude: f64,
    pub phase: f64,
}

/// Writes `omega,magnitude,phase` rows.
pub fn write_response_csv<W: Write>(mut w: W, points: &[ResponsePoint]) -> std::io::Result<()> {
    writeln!(w, "omega,magnitude,phase")?;
    for p in points {
        writeln!(w, "{:.12},{:.15},{:.15}", p.omega, p.magnitude, p.phase)?;
    }
    Ok(())
}

/// General causal allpass of order N built from `a_1..a_N`.
///
/// `literal` keeps the numerator exactly as `Σ a_k z^{k−N} + z^{−N}`;
/// otherwise the numerator is the reversed denominator, which is the
/// magnitude-flat choice.
pub fn general_allpass(coeffs: &[f64], literal: bool) -> SparseTransfer {
    let order = coeffs.len();
    let sign = if literal { 1.0 } else { -1.0 };
    let mut num: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .map(|(i, &a)| (order - (i + 1), sign * a))
        .collect();
    num.push((order, 1.0));
    let den = coeffs.iter().enumerate().map(|(i, &a)| (i + 1, -a)).collect();
    SparseTransfer { num, den }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_delay_has_linear_phase() {
        let t = SparseTransfer { num: vec![(3, 1.0)], den: vec![] };
        let h = t.eval(0.1);
        assert!((h.norm() - 1.0).abs() < 1e-15);
        assert!((h.arg() + 0.3).abs() < 1e-12);
    }

    #[test]
    fn general_allpass_flat_vs_literal() {
        let coeffs = [0.3, -0.2, 0.1];
        assert!(general_allpass(&coeffs, false).max_magnitude_deviation(1024) < 1e-12);
        assert!(general_allpass(&coeffs, true).max_magnitude_deviation(1024) > 1e-3);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let t = SparseTransfer { num: vec![(1, 1.0)], den: vec![] };
        let mut out = Vec::new();
        write_response_csv(&mut out, &t.response(3)).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("omega,magnitude,phase\n"));
    }
}
