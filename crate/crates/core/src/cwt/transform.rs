use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Result, WaveError};

/// Morlet wavelet `exp(i w0 t) exp(-t^2 / (2 sigma^2))` and the dyadic
/// scale grid `s_j = s0 * 2^(j dj)`, `j = 0..n_scales`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MorletParams {
    pub omega0: f64,
    pub sigma: f64,
    /// Smallest scale, in units of `dt`.
    pub s0: f64,
    /// Scale spacing in octaves.
    pub dj: f64,
    pub n_scales: usize,
    pub dt: f64,
}

impl Default for MorletParams {
    fn default() -> Self {
        MorletParams {
            omega0: 6.0,
            sigma: 1.0,
            s0: 2.0,
            dj: 1.0 / 12.0,
            n_scales: 1,
            dt: 1.0,
        }
    }
}

impl MorletParams {
    /// Default grid reaching the largest scale that still fits in `n` samples.
    pub fn for_length(n: usize) -> Self {
        let base = MorletParams::default();
        let octaves = (n as f64 * base.dt / base.s0).log2().max(0.0);
        MorletParams {
            n_scales: (octaves / base.dj + 1e-9).floor() as usize + 1,
            ..base
        }
    }

    pub fn scales(&self) -> Vec<f64> {
        (0..self.n_scales)
            .map(|j| self.s0 * (j as f64 * self.dj).exp2())
            .collect()
    }

    /// Ratio of the equivalent Fourier period to the scale.
    pub fn fourier_factor(&self) -> f64 {
        let ws = self.omega0 * self.sigma;
        4.0 * PI * self.sigma / (ws + (2.0 + ws * ws).sqrt())
    }

    pub fn periods(&self) -> Vec<f64> {
        let f = self.fourier_factor();
        self.scales().into_iter().map(|s| s * f).collect()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n < 16 {
            return Err(WaveError::InsufficientData(format!(
                "continuous transform needs at least 16 observations, got {n}"
            )));
        }
        if self.omega0.is_nan() || self.omega0 < 5.0 {
            return Err(WaveError::param("omega0", format!("{} is below 5", self.omega0)));
        }
        if !positive(self.sigma) {
            return Err(WaveError::param("sigma", "must be positive"));
        }
        if !positive(self.s0) || !positive(self.dj) || !positive(self.dt) {
            return Err(WaveError::param("scales", "s0, dj and dt must be positive"));
        }
        if self.n_scales < 1 {
            return Err(WaveError::param("n_scales", "at least one scale is required"));
        }
        let largest = self.s0 * ((self.n_scales - 1) as f64 * self.dj).exp2();
        if largest > n as f64 * self.dt * (1.0 + 1e-12) {
            return Err(WaveError::param(
                "n_scales",
                format!(
                    "largest scale {largest:.3} exceeds the series span {}",
                    n as f64 * self.dt
                ),
            ));
        }
        Ok(())
    }
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

/// Continuous wavelet coefficients `coeffs[scale][time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CwtField {
    pub scales: Vec<f64>,
    pub periods: Vec<f64>,
    pub coeffs: Vec<Vec<Complex64>>,
}

impl CwtField {
    pub fn power(&self) -> Vec<Vec<f64>> {
        self.coeffs
            .iter()
            .map(|row| row.iter().map(|c| c.norm_sqr()).collect())
            .collect()
    }
}

/// Largest trustworthy scale at each time: the distance to the nearest edge
/// divided by the Morlet e-folding time `sqrt(2) sigma`.
pub fn cone_of_influence(n: usize, params: &MorletParams) -> Vec<f64> {
    (0..n)
        .map(|b| b.min(n - 1 - b) as f64 * params.dt / (SQRT_2 * params.sigma))
        .collect()
}

/// Precomputed FFT plans and kernel spectra for transforms of one length.
///
/// Building an engine once and reusing it is what makes Monte Carlo loops
/// affordable; it is `Sync`, so surrogates can share it across threads.
pub struct CwtEngine {
    pub(crate) n: usize,
    pub(crate) m: usize,
    pub(crate) params: MorletParams,
    pub(crate) scales: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Daughter wavelet spectra, one row per scale.
    daughters: Vec<Vec<f64>>,
    /// Spectra of the Gaussian time-smoothing kernels, one row per scale.
    pub(crate) gaussians: Vec<Vec<f64>>,
}

impl CwtEngine {
    pub fn new(n: usize, params: MorletParams) -> Result<Self> {
        params.validate(n)?;
        let m = 2 * n.next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let omega: Vec<f64> = (0..m)
            .map(|k| {
                let k = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
                2.0 * PI * k / (m as f64 * params.dt)
            })
            .collect();
        let scales = params.scales();
        let norm = PI.powf(0.25) * (2.0 * params.sigma).sqrt();
        let daughters = scales
            .iter()
            .map(|&s| {
                let amp = norm * (s / params.dt).sqrt();
                omega
                    .iter()
                    .map(|&w| {
                        if w > 0.0 {
                            let arg = params.sigma * (s * w - params.omega0);
                            amp * (-0.5 * arg * arg).exp()
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let gaussians = scales
            .iter()
            .map(|&s| {
                // omega is in radians per unit time; the kernel's standard
                // deviation is s time units.
                omega.iter().map(|&w| (-0.5 * s * s * w * w).exp()).collect()
            })
            .collect();
        Ok(CwtEngine {
            n,
            m,
            params,
            scales,
            forward,
            inverse,
            daughters,
            gaussians,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn params(&self) -> &MorletParams {
        &self.params
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub(crate) fn fft(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Unnormalized inverse FFT followed by division by the length.
    pub(crate) fn ifft(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.m as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    pub(crate) fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(WaveError::Mismatch(format!(
                "engine built for {} observations, got {}",
                self.n,
                x.len()
            )));
        }
        Ok(())
    }

    /// Spectrum of the mean-removed, zero-padded series.
    fn spectrum(&self, x: &[f64]) -> Vec<Complex64> {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.m];
        for (b, v) in buf.iter_mut().zip(x) {
            b.re = v - mean;
        }
        self.fft(&mut buf);
        buf
    }

    /// Coefficients at every scale, computed in the frequency domain.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        self.check_len(x)?;
        let spec = self.spectrum(x);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.m];
        Ok(self
            .daughters
            .iter()
            .map(|d| {
                for ((b, s), w) in buf.iter_mut().zip(&spec).zip(d) {
                    *b = s * w;
                }
                self.ifft(&mut buf);
                buf[..self.n].to_vec()
            })
            .collect())
    }
}

/// Morlet continuous wavelet transform of `x` (mean removed first).
pub fn cwt_morlet(x: &[f64], params: &MorletParams) -> Result<CwtField> {
    let engine = CwtEngine::new(x.len(), *params)?;
    Ok(CwtField {
        scales: engine.scales.clone(),
        periods: params.periods(),
        coeffs: engine.transform(x)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_fits_series() {
        let p = MorletParams::for_length(512);
        // log2(512 / 2) / (1/12) + 1 = 97
        assert_eq!(p.n_scales, 97);
        assert!((p.scales()[96] - 512.0).abs() < 1e-9);
        p.validate(512).unwrap();
        let too_many = MorletParams { n_scales: 98, ..p };
        assert!(too_many.validate(512).is_err());
    }

    #[test]
    fn fourier_factor_standard_morlet() {
        assert!((MorletParams::default().fourier_factor() - 1.033_043_648_4).abs() < 1e-9);
    }

    #[test]
    fn zero_series_transforms_to_zero() {
        let f = cwt_morlet(&[0.0; 64], &MorletParams::for_length(64)).unwrap();
        assert!(f.coeffs.iter().flatten().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn sinusoid_ridge_at_its_period() {
        let n = 1024;
        let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / 64.0).sin()).collect();
        let p = MorletParams::for_length(n);
        let f = cwt_morlet(&x, &p).unwrap();
        let power = f.power();
        let mean_power: Vec<f64> = power.iter().map(|row| row[256..768].iter().sum::<f64>()).collect();
        let ridge = (0..p.n_scales)
            .max_by(|&a, &b| mean_power[a].total_cmp(&mean_power[b]))
            .unwrap();
        let expected = 64.0 / p.fourier_factor();
        assert!(
            (f.scales[ridge].log2() - expected.log2()).abs() <= p.dj,
            "{}",
            f.scales[ridge]
        );
    }

    #[test]
    fn impulse_power_is_local_at_fine_scales() {
        let n = 512;
        let mut x = vec![0.0; n];
        x[200] = 1.0;
        let f = cwt_morlet(&x, &MorletParams::for_length(n)).unwrap();
        // Scale 4, one octave above the finest, where the wavelet is well resolved.
        let row = &f.power()[12];
        let peak = (0..n).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        assert!((peak as i64 - 200).abs() <= 1);
        let s = f.scales[12];
        // Beyond a few e-folding widths the impulse response has died out.
        let far = (200.0 + 4.0 * SQRT_2 * s) as usize;
        assert!(row[far] < 1e-3 * row[200]);
    }

    #[test]
    fn coi_mirror_and_edges() {
        let p = MorletParams::for_length(101);
        let coi = cone_of_influence(101, &p);
        assert_eq!(coi[0], 0.0);
        for b in 0..101 {
            assert_eq!(coi[b], coi[100 - b]);
        }
        let max = coi.iter().cloned().fold(0.0, f64::max);
        assert_eq!(coi[50], max);
    }

    #[test]
    fn short_series_rejected() {
        assert!(cwt_morlet(&[1.0; 8], &MorletParams::for_length(8)).is_err());
    }
}
