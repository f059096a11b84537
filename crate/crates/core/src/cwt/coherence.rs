use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use super::transform::{cone_of_influence, CwtEngine, MorletParams};
use crate::error::{Result, WaveError};

/// Smoothing operator applied before forming the coherence ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothing {
    /// Gaussian in time (standard deviation equal to the scale) followed by
    /// a 0.6-octave boxcar across scales.
    #[default]
    Standard,
    /// No smoothing. The ratio then collapses to one wherever it is defined,
    /// which is useful only as a diagnostic.
    Disabled,
}

/// Thresholds a coherence field was tested against.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Thresholds {
    PerScale(Vec<f64>),
    PerCell(Vec<Vec<f64>>),
}

impl Thresholds {
    pub fn at(&self, scale: usize, time: usize) -> f64 {
        match self {
            Thresholds::PerScale(v) => v[scale],
            Thresholds::PerCell(v) => v[scale][time],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceField {
    pub scales: Vec<f64>,
    pub periods: Vec<f64>,
    /// Squared coherence `r2[scale][time]` in `[0, 1]`.
    pub r2: Vec<Vec<f64>>,
    /// Phase of the smoothed cross-wavelet in `[-pi, pi]`.
    pub phase: Vec<Vec<f64>>,
    /// Cone of influence, as the largest trustworthy scale per time.
    pub coi: Vec<f64>,
    pub sig_mask: Option<Vec<Vec<bool>>>,
    pub thresholds: Option<Thresholds>,
    pub n_surrogates: usize,
}

impl CoherenceField {
    pub fn len(&self) -> usize {
        self.coi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coi.is_empty()
    }

    pub fn inside_coi(&self, scale: usize, time: usize) -> bool {
        self.scales[scale] <= self.coi[time]
    }

    /// Fraction of cells inside the cone flagged significant, if tested.
    pub fn significant_fraction_in_coi(&self) -> Option<f64> {
        let mask = self.sig_mask.as_ref()?;
        let (mut inside, mut hits) = (0usize, 0usize);
        for (s, row) in mask.iter().enumerate() {
            for (t, &sig) in row.iter().enumerate() {
                if self.inside_coi(s, t) {
                    inside += 1;
                    hits += sig as usize;
                }
            }
        }
        Some(if inside == 0 { 0.0 } else { hits as f64 / inside as f64 })
    }
}

/// Raw coherence output used both for observed data and for surrogates.
pub(crate) struct CoherenceGrid {
    pub r2: Vec<Vec<f64>>,
    pub phase: Vec<Vec<f64>>,
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|v| *v == x[0])
}

/// Boxcar weights spanning 0.6 octaves, with fractional end taps so the
/// window width is exact on any scale grid.
fn scale_boxcar(dj: f64) -> Vec<f64> {
    let steps = 0.6 / (2.0 * dj);
    let whole = steps.round().max(1.0) as usize;
    let frac = steps.fract();
    let mut w = vec![1.0; 2 * whole - 1];
    if frac > 0.0 {
        w.insert(0, frac);
        w.push(frac);
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

/// Centered convolution across the scale axis with zero extension.
fn smooth_scales<T>(rows: &[Vec<T>], kernel: &[f64]) -> Vec<Vec<T>>
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let half = (kernel.len() / 2) as i64;
    let ns = rows.len() as i64;
    (0..ns)
        .map(|s| {
            let mut acc = vec![T::default(); rows[0].len()];
            for (k, &w) in kernel.iter().enumerate() {
                let src = s + k as i64 - half;
                if (0..ns).contains(&src) {
                    for (a, v) in acc.iter_mut().zip(&rows[src as usize]) {
                        *a = *a + *v * w;
                    }
                }
            }
            acc
        })
        .collect()
}

impl CwtEngine {
    pub(crate) fn coherence_grid(&self, x: &[f64], y: &[f64], smoothing: Smoothing) -> Result<CoherenceGrid> {
        self.check_len(x)?;
        self.check_len(y)?;
        if is_constant(x) || is_constant(y) {
            return Err(WaveError::ConstantSeries);
        }
        let wx = self.transform(x)?;
        let wy = self.transform(y)?;
        let n = self.n;

        let mut power: Vec<Vec<Complex64>> = Vec::with_capacity(wx.len());
        let mut cross: Vec<Vec<Complex64>> = Vec::with_capacity(wx.len());
        let mut pbuf = vec![Complex64::new(0.0, 0.0); self.m];
        let mut cbuf = vec![Complex64::new(0.0, 0.0); self.m];
        for (si, (ax, ay)) in wx.iter().zip(&wy).enumerate() {
            let inv_s = 1.0 / self.scales[si];
            // Both auto spectra ride in one complex signal: real part for x,
            // imaginary part for y. The Gaussian spectrum is real and even,
            // so the two never mix.
            for t in 0..n {
                pbuf[t] = Complex64::new(ax[t].norm_sqr() * inv_s, ay[t].norm_sqr() * inv_s);
                cbuf[t] = ax[t] * ay[t].conj() * inv_s;
            }
            if smoothing == Smoothing::Standard {
                for t in n..self.m {
                    pbuf[t] = Complex64::new(0.0, 0.0);
                    cbuf[t] = Complex64::new(0.0, 0.0);
                }
                self.fft(&mut pbuf);
                self.fft(&mut cbuf);
                for ((p, c), g) in pbuf.iter_mut().zip(cbuf.iter_mut()).zip(&self.gaussians[si]) {
                    *p *= g;
                    *c *= g;
                }
                self.ifft(&mut pbuf);
                self.ifft(&mut cbuf);
            }
            power.push(pbuf[..n].to_vec());
            cross.push(cbuf[..n].to_vec());
        }
        if smoothing == Smoothing::Standard {
            let kernel = scale_boxcar(self.params.dj);
            power = smooth_scales(&power, &kernel);
            cross = smooth_scales(&cross, &kernel);
        }

        let mut r2 = Vec::with_capacity(power.len());
        let mut phase = Vec::with_capacity(power.len());
        for (p_row, c_row) in power.iter().zip(&cross) {
            r2.push(
                p_row
                    .iter()
                    .zip(c_row)
                    .map(|(p, c)| {
                        let denom = p.re * p.im;
                        if denom > 0.0 {
                            (c.norm_sqr() / denom).clamp(0.0, 1.0)
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            );
            phase.push(c_row.iter().map(|c| c.arg()).collect());
        }
        Ok(CoherenceGrid { r2, phase })
    }

    /// Squared wavelet coherence and phase of `x` against `y`.
    pub fn coherence(&self, x: &[f64], y: &[f64], smoothing: Smoothing) -> Result<CoherenceField> {
        let grid = self.coherence_grid(x, y, smoothing)?;
        Ok(CoherenceField {
            scales: self.scales.clone(),
            periods: self.params.periods(),
            r2: grid.r2,
            phase: grid.phase,
            coi: cone_of_influence(self.n, &self.params),
            sig_mask: None,
            thresholds: None,
            n_surrogates: 0,
        })
    }
}

pub fn wavelet_coherence(x: &[f64], y: &[f64], params: &MorletParams, smoothing: Smoothing) -> Result<CoherenceField> {
    if x.len() != y.len() {
        return Err(WaveError::Mismatch(format!(
            "series lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    CwtEngine::new(x.len(), *params)?.coherence(x, y, smoothing)
}

/// Lead/lag reading of a phase angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseClass {
    InPhaseXLeads,
    InPhaseYLeads,
    AntiPhaseYLeads,
    AntiPhaseXLeads,
}

impl PhaseClass {
    pub fn describe(self) -> &'static str {
        match self {
            PhaseClass::InPhaseXLeads => "in-phase, X leads Y",
            PhaseClass::InPhaseYLeads => "in-phase, Y leads X",
            PhaseClass::AntiPhaseYLeads => "anti-phase, Y leading",
            PhaseClass::AntiPhaseXLeads => "anti-phase, X leading",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PhaseReading {
    pub class: PhaseClass,
    /// The angle sits exactly on a quadrant edge, where the reading is a convention.
    pub on_boundary: bool,
}

/// Classifies a phase angle into quadrants using closed-left intervals;
/// `pi` is identified with `-pi`.
pub fn phase_classify(phi: f64) -> PhaseReading {
    let phi = if phi >= PI { -PI } else { phi };
    let class = if phi >= FRAC_PI_2 {
        PhaseClass::AntiPhaseYLeads
    } else if phi >= 0.0 {
        PhaseClass::InPhaseXLeads
    } else if phi >= -FRAC_PI_2 {
        PhaseClass::InPhaseYLeads
    } else {
        PhaseClass::AntiPhaseXLeads
    };
    let on_boundary = phi == 0.0 || phi.abs() == FRAC_PI_2 || phi == -PI;
    PhaseReading { class, on_boundary }
}
