use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::error::{Result, WaveError};

/// Autocovariance of unit-variance fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(h: f64, k: usize) -> f64 {
    let k = k as f64;
    let e = 2.0 * h;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// Eigenvalues of the circulant embedding of size `m` (even).
fn circulant_eigenvalues(h: f64, m: usize) -> Vec<f64> {
    let half = m / 2;
    let mut row: Vec<Complex64> = (0..m)
        .map(|i| {
            let lag = if i <= half { i } else { m - i };
            Complex64::new(fgn_autocovariance(h, lag), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut row);
    row.into_iter().map(|c| c.re).collect()
}

/// Unit-variance fractional Gaussian noise with Hurst exponent `h`, exact
/// in distribution, via circulant embedding of the autocovariance.
pub fn synth_fgn(h: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(h > 0.0 && h < 1.0) {
        return Err(WaveError::param("hurst", format!("{h} is not in (0, 1)")));
    }
    if n < 64 {
        return Err(WaveError::InsufficientData(format!(
            "fractional Gaussian noise needs n >= 64, got {n}"
        )));
    }
    let mut m = 2 * n.next_power_of_two();
    let mut lambda = circulant_eigenvalues(h, m);
    let tol = 1e-10 * lambda.iter().cloned().fold(0.0, f64::max);
    let min = |l: &[f64]| l.iter().cloned().fold(f64::INFINITY, f64::min);
    if min(&lambda) < -tol {
        m *= 2;
        lambda = circulant_eigenvalues(h, m);
        let lowest = min(&lambda);
        if lowest < -tol {
            return Err(WaveError::Embedding { min_eigenvalue: lowest });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf: Vec<Complex64> = lambda
        .iter()
        .map(|&l| {
            let amp = (l.max(0.0) / m as f64).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(amp * re, amp * im)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    Ok(buf[..n].iter().map(|c| c.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lag1(x: &[f64]) -> f64 {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let d: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
        x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / d
    }

    #[test]
    fn autocovariance_reference_values() {
        assert_eq!(fgn_autocovariance(0.7, 0), 1.0);
        assert!((fgn_autocovariance(0.8, 1) - (2f64.powf(0.6) - 1.0)).abs() < 1e-15);
        assert!(fgn_autocovariance(0.5, 3).abs() < 1e-15);
    }

    #[test]
    fn half_is_white_noise() {
        let x = synth_fgn(0.5, 4096, 1).unwrap();
        assert!(lag1(&x).abs() < 0.05);
    }

    #[test]
    fn lag_one_matches_theory() {
        let x = synth_fgn(0.8, 4096, 2).unwrap();
        let theory = 2f64.powf(0.6) - 1.0;
        assert!((lag1(&x) - theory).abs() < 0.05, "{}", lag1(&x));
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(synth_fgn(0.7, 100, 3).unwrap(), synth_fgn(0.7, 100, 3).unwrap());
        assert_ne!(synth_fgn(0.7, 100, 3).unwrap(), synth_fgn(0.7, 100, 4).unwrap());
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(synth_fgn(1.0, 100, 0).is_err());
        assert!(synth_fgn(0.5, 10, 0).is_err());
    }

    #[test]
    fn unit_variance() {
        let mut total = 0.0;
        for seed in 0..20 {
            let x = synth_fgn(0.3, 2048, seed).unwrap();
            total += x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        }
        assert!((total / 20.0 - 1.0).abs() < 0.05);
    }
}
