//! Chebyshev series: interpolation at Chebyshev-Lobatto points and Clenshaw evaluation.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Coefficients `c_0..=c_n` of the degree-`n` interpolant of `f` at the
/// points `cos(pi j / n)`, computed by a DCT-I through a length-`2n` FFT.
pub fn interpolate(f: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
    assert!(n >= 1, "interpolation degree must be positive");
    let samples: Vec<f64> = (0..=n).map(|j| f((std::f64::consts::PI * j as f64 / n as f64).cos())).collect();
    let mut buf: Vec<Complex<f64>> = samples
        .iter()
        .chain(samples[1..n].iter().rev())
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(2 * n).process(&mut buf);
    let mut c: Vec<f64> = buf[..=n].iter().map(|z| z.re / n as f64).collect();
    c[0] /= 2.0;
    c[n] /= 2.0;
    c
}

/// `Σ c_k T_k(x)` by Clenshaw's recurrence.
pub fn evaluate(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// Smallest `d` with `Σ_{k > d} |c_k| <= tol`, and that tail sum.
pub fn truncation_degree(c: &[f64], tol: f64) -> (usize, f64) {
    let mut tail = 0.0;
    for d in (0..c.len()).rev() {
        if tail + c[d].abs() > tol {
            return (d, tail);
        }
        tail += c[d].abs();
    }
    (0, tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_monomials() {
        let c = interpolate(|x| 4.0 * x * x * x - 3.0 * x, 8);
        for (k, v) in c.iter().enumerate() {
            let want = if k == 3 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-14, "c_{k} = {v}");
        }
    }

    #[test]
    fn clenshaw_matches_cosine_form() {
        let c = [0.3, -0.2, 0.5, 0.1];
        for &x in &[-1.0, -0.4, 0.0, 0.7, 1.0] {
            let t = f64::acos(x);
            let direct: f64 = c.iter().enumerate().map(|(k, ck)| ck * (k as f64 * t).cos()).sum();
            assert!((evaluate(&c, x) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn exponential_converges() {
        let c = interpolate(f64::exp, 64);
        let (d, tail) = truncation_degree(&c, 1e-13);
        assert!(d < 20);
        assert!(tail <= 1e-13);
        assert!((evaluate(&c[..=d], 0.3) - 0.3f64.exp()).abs() < 1e-12);
    }
}
