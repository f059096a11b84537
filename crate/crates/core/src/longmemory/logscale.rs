use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WaveError};
use crate::modwt::{max_level, modwt_transform, BoundaryMode, FilterPair};
use crate::stats::{chi_squared_quantile, normal_critical, t_two_sided_p, wls_line};

/// Highest octave with at least four decimated coefficients.
pub fn max_octave(n: usize) -> usize {
    let mut j = max_level(n);
    while j > 0 && n >> j < 4 {
        j -= 1;
    }
    j
}

/// Octave range `[2, 8]`, with the upper end clipped to what `n` supports.
pub fn default_octaves(n: usize) -> (usize, usize) {
    (2, 8.min(max_octave(n)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HurstFit {
    pub hurst: f64,
    pub std_err: f64,
    pub t_value: f64,
    pub p_value: f64,
    pub slope: f64,
    pub intercept: f64,
    pub j1: usize,
    pub j2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogscaleDiagram {
    pub octaves: Vec<usize>,
    /// `log2` of the mean squared decimated coefficient per octave.
    pub eta: Vec<f64>,
    pub n_j: Vec<usize>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub fit: HurstFit,
}

/// Decimated, DWT-normalized wavelet coefficients for octaves `1..=levels`:
/// `d(j,k) = 2^(j/2) W(j, 2^j (k+1) - 1)` from a periodic MODWT.
pub fn octave_coefficients(x: &[f64], levels: usize, filter: &FilterPair) -> Result<Vec<Vec<f64>>> {
    let dec = modwt_transform(x, levels, filter, BoundaryMode::Periodic)?;
    Ok((1..=levels)
        .map(|j| {
            let stride = 1usize << j;
            let gain = (stride as f64).sqrt();
            let w = dec.details(j);
            (0..x.len() / stride).map(|k| gain * w[stride * (k + 1) - 1]).collect()
        })
        .collect())
}

/// Weighted least-squares Hurst fit of `eta` on the octave over `[j1, j2]`,
/// with weights `S_j = n ln^2(2) / 2^(j+1)`, the inverse asymptotic
/// variances of `eta_j`. The standard error follows from those known
/// variances, so an exact fit still reports a positive value.
pub fn hurst_wls(octaves: &[usize], eta: &[f64], n: usize, j1: usize, j2: usize) -> Result<HurstFit> {
    if j1 < 1 || j2 < j1 + 2 {
        return Err(WaveError::param(
            "octaves",
            format!("range [{j1}, {j2}] must start at 1 or later and span at least 3 octaves"),
        ));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    let ln2 = std::f64::consts::LN_2;
    for (&j, &e) in octaves.iter().zip(eta) {
        if (j1..=j2).contains(&j) {
            if !e.is_finite() {
                return Err(WaveError::InsufficientData(format!("octave {j} has no energy")));
            }
            xs.push(j as f64);
            ys.push(e);
            ws.push(n as f64 * ln2 * ln2 / (1u64 << (j + 1)) as f64);
        }
    }
    if xs.len() != j2 - j1 + 1 {
        return Err(WaveError::InsufficientData(format!(
            "octaves {j1}..={j2} are not all available"
        )));
    }
    let fit = wls_line(&xs, &ys, &ws);
    let hurst = (fit.slope + 1.0) / 2.0;
    let std_err = 0.5 * fit.slope_variance.sqrt();
    let t_value = hurst / std_err;
    let df = (xs.len() - 2).max(1) as f64;
    Ok(HurstFit {
        hurst,
        std_err,
        t_value,
        p_value: t_two_sided_p(t_value, df),
        slope: fit.slope,
        intercept: fit.intercept,
        j1,
        j2,
    })
}

/// Logscale diagram of `x` with a Hurst fit over `[j1, j2]`.
pub fn logscale_diagram(
    x: &[f64],
    j1: usize,
    j2: usize,
    filter: &FilterPair,
    confidence: f64,
) -> Result<LogscaleDiagram> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(WaveError::param("confidence", format!("{confidence} is not in (0, 1)")));
    }
    let top = max_octave(x.len());
    if j2 > top {
        return Err(WaveError::InsufficientData(format!(
            "octave {j2} keeps fewer than 4 coefficients for n = {} (highest usable octave is {top})",
            x.len()
        )));
    }
    let coeffs = octave_coefficients(x, top, filter)?;
    let alpha = 1.0 - confidence;
    let mut diagram = LogscaleDiagram {
        octaves: Vec::with_capacity(top),
        eta: Vec::with_capacity(top),
        n_j: Vec::with_capacity(top),
        ci_low: Vec::with_capacity(top),
        ci_high: Vec::with_capacity(top),
        fit: HurstFit {
            hurst: f64::NAN,
            std_err: f64::NAN,
            t_value: f64::NAN,
            p_value: f64::NAN,
            slope: f64::NAN,
            intercept: f64::NAN,
            j1,
            j2,
        },
    };
    for (i, d) in coeffs.iter().enumerate() {
        let nj = d.len();
        let v = d.iter().map(|c| c * c).sum::<f64>() / nj as f64;
        let dof = nj as f64;
        diagram.octaves.push(i + 1);
        diagram.eta.push(v.log2());
        diagram.n_j.push(nj);
        diagram
            .ci_low
            .push((dof * v / chi_squared_quantile(1.0 - alpha / 2.0, dof)).log2());
        diagram
            .ci_high
            .push((dof * v / chi_squared_quantile(alpha / 2.0, dof)).log2());
    }
    diagram.fit = hurst_wls(&diagram.octaves, &diagram.eta, x.len(), j1, j2)?;
    Ok(diagram)
}

/// Hurst fit of `x` over `[j1, j2]`.
pub fn estimate_hurst(x: &[f64], j1: usize, j2: usize, filter: &FilterPair) -> Result<HurstFit> {
    Ok(logscale_diagram(x, j1, j2, filter, 0.95)?.fit)
}

/// Long-memory parameters implied by a logscale slope `alpha = 2H - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingParams {
    pub alpha: f64,
    pub hurst: f64,
    /// Self-similarity (Hölder) exponent, `H - 1`.
    pub holder: f64,
    /// Fractal dimension, `2 - h`.
    pub fractal_dim: f64,
    /// Spectral constant read from the fit intercept as `2^intercept`.
    pub cf: f64,
    pub alpha_ci: (f64, f64),
    pub hurst_ci: (f64, f64),
    pub holder_ci: (f64, f64),
    pub fractal_dim_ci: (f64, f64),
}

impl ScalingParams {
    /// Maps `alpha` and its interval through the defining affine relations.
    pub fn from_alpha(alpha: f64, alpha_ci: (f64, f64), cf: f64) -> Self {
        let hurst = |a: f64| (1.0 + a) / 2.0;
        let holder = |a: f64| hurst(a) - 1.0;
        let dim = |a: f64| 2.0 - holder(a);
        ScalingParams {
            alpha,
            hurst: hurst(alpha),
            holder: holder(alpha),
            fractal_dim: dim(alpha),
            cf,
            alpha_ci,
            hurst_ci: (hurst(alpha_ci.0), hurst(alpha_ci.1)),
            holder_ci: (holder(alpha_ci.0), holder(alpha_ci.1)),
            // D decreases in alpha, so the interval ends swap.
            fractal_dim_ci: (dim(alpha_ci.1), dim(alpha_ci.0)),
        }
    }
}

pub fn scaling_parameters(fit: &HurstFit, confidence: f64) -> ScalingParams {
    let half = normal_critical(confidence) * 2.0 * fit.std_err;
    ScalingParams::from_alpha(fit.slope, (fit.slope - half, fit.slope + half), fit.intercept.exp2())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollingHurstPoint {
    /// Index of the last observation in the window.
    pub anchor: usize,
    pub fit: HurstFit,
}

/// Hurst fits over sliding windows.
pub fn rolling_hurst(
    x: &[f64],
    window: usize,
    step: usize,
    j1: usize,
    j2: usize,
    filter: &FilterPair,
) -> Result<Vec<RollingHurstPoint>> {
    if step == 0 {
        return Err(WaveError::param("step", "must be at least 1"));
    }
    let needed = 4usize << j2;
    if window < needed {
        return Err(WaveError::param(
            "window",
            format!("{window} is shorter than 4 * 2^{j2} = {needed}"),
        ));
    }
    if window > x.len() {
        return Err(WaveError::InsufficientData(format!(
            "window {window} exceeds the {} available observations",
            x.len()
        )));
    }
    let count = (x.len() - window) / step + 1;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let start = i * step;
            Ok(RollingHurstPoint {
                anchor: start + window - 1,
                fit: estimate_hurst(&x[start..start + window], j1, j2, filter)?,
            })
        })
        .collect()
}
