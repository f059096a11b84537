//! Rolling-window wavelet correlation and the before/after event test used
//! to tell contagion (a jump in short-horizon co-movement) from plain
//! interdependence.

use rayon::prelude::*;
use serde::Serialize;

use crate::dependence::{horizon_label, wavelet_correlation};
use crate::error::{Result, WaveError};
use crate::modwt::{build_filter, modwt_transform, BoundaryMode, FilterKind};
use crate::stats::welch_t_test;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RollingOptions {
    pub levels: usize,
    pub window: usize,
    pub step: usize,
    pub filter: FilterKind,
    pub boundary: BoundaryMode,
}

impl Default for RollingOptions {
    fn default() -> Self {
        RollingOptions {
            levels: 6,
            // Smallest window leaving four coefficients per period at level 6.
            window: 256,
            step: 1,
            filter: FilterKind::La8,
            boundary: BoundaryMode::Reflection,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollingCorrSeries {
    pub level: usize,
    pub horizon: String,
    pub window_length: usize,
    pub step: usize,
    /// Index of the last observation of each window.
    pub anchors: Vec<usize>,
    pub rho: Vec<f64>,
}

/// Number of windows of length `window` advanced by `step` over `n` observations.
pub fn window_count(n: usize, window: usize, step: usize) -> usize {
    if window > n || step == 0 {
        0
    } else {
        (n - window) / step + 1
    }
}

/// Wavelet correlation of `x` and `y` recomputed over sliding windows, one
/// series per level.
pub fn rolling_wavelet_correlation(x: &[f64], y: &[f64], opts: &RollingOptions) -> Result<Vec<RollingCorrSeries>> {
    if x.len() != y.len() {
        return Err(WaveError::Mismatch(format!(
            "series lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if opts.levels == 0 {
        return Err(WaveError::param("levels", "must be at least 1"));
    }
    if opts.step == 0 {
        return Err(WaveError::param("step", "must be at least 1"));
    }
    let min_window = 4usize << opts.levels;
    if opts.window < min_window {
        return Err(WaveError::param(
            "window",
            format!("{} is shorter than 4 * 2^{} = {min_window}", opts.window, opts.levels),
        ));
    }
    if opts.window > x.len() {
        return Err(WaveError::InsufficientData(format!(
            "window {} exceeds the {} available observations",
            opts.window,
            x.len()
        )));
    }
    let filter = build_filter(opts.filter.name())?;
    let count = window_count(x.len(), opts.window, opts.step);
    let per_window: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let start = i * opts.step;
            let range = start..start + opts.window;
            let a = modwt_transform(&x[range.clone()], opts.levels, &filter, opts.boundary)?;
            let b = modwt_transform(&y[range], opts.levels, &filter, opts.boundary)?;
            Ok(wavelet_correlation(&a, &b, 0.95)?.estimate)
        })
        .collect::<Result<_>>()?;
    let anchors: Vec<usize> = (0..count).map(|i| i * opts.step + opts.window - 1).collect();
    Ok((1..=opts.levels)
        .map(|j| RollingCorrSeries {
            level: j,
            horizon: horizon_label(j),
            window_length: opts.window,
            step: opts.step,
            anchors: anchors.clone(),
            rho: per_window.iter().map(|r| r[j - 1]).collect(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventTestResult {
    pub level: usize,
    pub horizon: String,
    pub mean_before: f64,
    pub mean_after: f64,
    /// Welch statistic of before minus after: negative when correlation rose.
    pub t_stat: f64,
    pub df: f64,
    pub p_value: f64,
    pub significant_1pct: bool,
    pub significant_5pct: bool,
    pub n_before: usize,
    pub n_after: usize,
}

/// Welch two-sample test of rolling correlations anchored in
/// `[event - pre_len, event)` against those anchored in `[event, event + post_len)`.
/// Lengths are in observations, not window positions.
pub fn event_ttest(
    series: &RollingCorrSeries,
    event: usize,
    pre_len: usize,
    post_len: usize,
) -> Result<EventTestResult> {
    let lo = event.saturating_sub(pre_len);
    let hi = event.saturating_add(post_len);
    let mut before = Vec::new();
    let mut after = Vec::new();
    for (&a, &r) in series.anchors.iter().zip(&series.rho) {
        if (lo..event).contains(&a) {
            before.push(r);
        } else if (event..hi).contains(&a) {
            after.push(r);
        }
    }
    if before.len() < 2 || after.len() < 2 {
        return Err(WaveError::InsufficientData(format!(
            "level {}: {} windows before and {} after the event, at least 2 each are needed",
            series.level,
            before.len(),
            after.len()
        )));
    }
    Ok(compare_samples(series.level, &before, &after))
}

/// Event test on explicit before/after correlation samples.
pub fn compare_samples(level: usize, before: &[f64], after: &[f64]) -> EventTestResult {
    let test = welch_t_test(before, after);
    EventTestResult {
        level,
        horizon: horizon_label(level),
        mean_before: crate::stats::mean(before),
        mean_after: crate::stats::mean(after),
        t_stat: test.t,
        df: test.df,
        p_value: test.p_value,
        significant_1pct: test.p_value < 0.01,
        significant_5pct: test.p_value < 0.05,
        n_before: before.len(),
        n_after: after.len(),
    }
}

/// Runs [`event_ttest`] on every level.
pub fn event_table(
    rolling: &[RollingCorrSeries],
    event: usize,
    pre_len: usize,
    post_len: usize,
) -> Result<Vec<EventTestResult>> {
    rolling
        .iter()
        .map(|s| event_ttest(s, event, pre_len, post_len))
        .collect()
}
