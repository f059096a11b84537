//! Scale-by-scale variance, correlation, cross-correlation and multiple
//! (cross-)correlation of MODWT coefficients.
//!
//! Every estimator works on the coefficients that survive the boundary mask,
//! so brickwall decompositions automatically drop wrap-contaminated values.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Result, WaveError};
use crate::modwt::Decomposition;
use crate::stats::{chi_squared_quantile, fisher_ci};

/// Tolerance under which two R² values count as tied for leadership.
const LEADER_TIE_TOL: f64 = 1e-12;

/// Human label of the time band captured by level `j` of a daily series.
pub fn horizon_label(j: usize) -> String {
    format!("{}-{} days", 1u64 << (j - 1), 1u64 << j)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleProfile {
    pub levels: Vec<usize>,
    pub horizon_labels: Vec<String>,
    pub estimate: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub effective_n: Vec<usize>,
}

impl ScaleProfile {
    fn with_capacity(levels: usize) -> Self {
        ScaleProfile {
            levels: Vec::with_capacity(levels),
            horizon_labels: Vec::with_capacity(levels),
            estimate: Vec::with_capacity(levels),
            ci_low: Vec::with_capacity(levels),
            ci_high: Vec::with_capacity(levels),
            effective_n: Vec::with_capacity(levels),
        }
    }

    fn push(&mut self, j: usize, estimate: f64, ci: (f64, f64), effective_n: usize) {
        self.levels.push(j);
        self.horizon_labels.push(horizon_label(j));
        self.estimate.push(estimate);
        self.ci_low.push(ci.0);
        self.ci_high.push(ci.1);
        self.effective_n.push(effective_n);
    }
}

fn check_confidence(confidence: f64) -> Result<()> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(WaveError::param("confidence", format!("{confidence} is not in (0, 1)")));
    }
    Ok(())
}

/// Unmasked coefficient count at level `j`, rejecting levels too sparse to estimate.
fn effective_n(dec: &Decomposition, j: usize, minimum: usize) -> Result<usize> {
    let count = dec.nonboundary_mask(j).iter().filter(|&&b| b).count();
    if count < minimum {
        return Err(WaveError::InsufficientData(format!(
            "level {j} keeps {count} non-boundary coefficients, at least {minimum} are needed"
        )));
    }
    Ok(count)
}

/// Sum of squares and cross products over the shared unmasked coefficients.
fn level_moments(a: &Decomposition, b: &Decomposition, j: usize) -> (f64, f64, f64) {
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    for ((x, y), &keep) in a.details(j).iter().zip(b.details(j)).zip(a.nonboundary_mask(j)) {
        if keep {
            saa += x * x;
            sbb += y * y;
            sab += x * y;
        }
    }
    (saa, sbb, sab)
}

fn normalized(cross: f64, count: f64, var_a: f64, var_b: f64) -> f64 {
    ((cross / count) / (var_a * var_b).sqrt()).clamp(-1.0, 1.0)
}

/// Wavelet variance per level with a chi-square confidence interval whose
/// equivalent degrees of freedom are `max(n_j / 2^j, 1)`.
pub fn wavelet_variance(dec: &Decomposition, confidence: f64) -> Result<ScaleProfile> {
    check_confidence(confidence)?;
    let mut out = ScaleProfile::with_capacity(dec.levels());
    for j in 1..=dec.levels() {
        let n = effective_n(dec, j, 4)?;
        let var = dec.unmasked(j).map(|v| v * v).sum::<f64>() / n as f64;
        let edof = (n as f64 / (1u64 << j) as f64).max(1.0);
        let alpha = 1.0 - confidence;
        let ci = (
            edof * var / chi_squared_quantile(1.0 - alpha / 2.0, edof),
            edof * var / chi_squared_quantile(alpha / 2.0, edof),
        );
        out.push(j, var, ci, n);
    }
    Ok(out)
}

/// Wavelet covariance per level, `(1/n_j) sum_k d_A(j,k) d_B(j,k)`.
pub fn wavelet_covariance(a: &Decomposition, b: &Decomposition) -> Result<Vec<f64>> {
    a.compatible(b)?;
    (1..=a.levels())
        .map(|j| {
            let n = effective_n(a, j, 1)?;
            Ok(level_moments(a, b, j).2 / n as f64)
        })
        .collect()
}

/// Covariance carried by the smooth: `(1/n) sum V_A V_B - mean(x_A) mean(x_B)`.
///
/// Together with [`wavelet_covariance`] over all levels of a periodic
/// decomposition this reproduces the population covariance of the pair.
pub fn smooth_covariance(a: &Decomposition, b: &Decomposition) -> Result<f64> {
    a.compatible(b)?;
    let n = a.len() as f64;
    let sa = a.smooth();
    let sb = b.smooth();
    let cross = sa.iter().zip(sb).map(|(x, y)| x * y).sum::<f64>() / n;
    let mean_a = sa.iter().sum::<f64>() / n;
    let mean_b = sb.iter().sum::<f64>() / n;
    Ok(cross - mean_a * mean_b)
}

/// Wavelet correlation per level with Fisher-z confidence bands.
pub fn wavelet_correlation(a: &Decomposition, b: &Decomposition, confidence: f64) -> Result<ScaleProfile> {
    a.compatible(b)?;
    check_confidence(confidence)?;
    let mut out = ScaleProfile::with_capacity(a.levels());
    for j in 1..=a.levels() {
        let n = effective_n(a, j, 4)?;
        let (saa, sbb, sab) = level_moments(a, b, j);
        if saa <= 0.0 || sbb <= 0.0 {
            return Err(WaveError::ZeroVariance { level: j });
        }
        let nf = n as f64;
        let rho = normalized(sab, nf, saa / nf, sbb / nf);
        out.push(j, rho, fisher_ci(rho, nf, confidence), n);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCorrProfile {
    pub level: usize,
    pub horizon: String,
    pub lags: Vec<i64>,
    pub rho: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    /// Lag of the largest correlation; ties go to the smallest `|lag|`.
    pub peak_lag: i64,
}

/// Lagged wavelet correlation `corr(d_A(j,k), d_B(j,k+lag))` for
/// `lag in [-max_lag, max_lag]`. A peak at a positive lag means A leads B.
pub fn wavelet_cross_correlation(
    a: &Decomposition,
    b: &Decomposition,
    max_lag: usize,
    confidence: f64,
) -> Result<Vec<CrossCorrProfile>> {
    a.compatible(b)?;
    check_confidence(confidence)?;
    let mut out = Vec::with_capacity(a.levels());
    for j in 1..=a.levels() {
        let n = effective_n(a, j, 4)?;
        if 2 * max_lag >= n {
            return Err(WaveError::param(
                "max_lag",
                format!("{max_lag} is not below half of the {n} usable coefficients at level {j}"),
            ));
        }
        let (saa, sbb, _) = level_moments(a, b, j);
        if saa <= 0.0 || sbb <= 0.0 {
            return Err(WaveError::ZeroVariance { level: j });
        }
        let nf = n as f64;
        let (var_a, var_b) = (saa / nf, sbb / nf);
        let (da, db, mask) = (a.details(j), b.details(j), a.nonboundary_mask(j));
        let len = da.len() as i64;
        let mut profile = CrossCorrProfile {
            level: j,
            horizon: horizon_label(j),
            lags: Vec::new(),
            rho: Vec::new(),
            ci_low: Vec::new(),
            ci_high: Vec::new(),
            peak_lag: 0,
        };
        for lag in -(max_lag as i64)..=max_lag as i64 {
            let (mut cross, mut count) = (0.0, 0usize);
            for k in 0.max(-lag)..len.min(len - lag) {
                let (k, m) = (k as usize, (k + lag) as usize);
                if mask[k] && mask[m] {
                    cross += da[k] * db[m];
                    count += 1;
                }
            }
            let rho = if count == 0 {
                0.0
            } else {
                normalized(cross, count as f64, var_a, var_b)
            };
            let ci = fisher_ci(rho, count as f64, confidence);
            profile.lags.push(lag);
            profile.rho.push(rho);
            profile.ci_low.push(ci.0);
            profile.ci_high.push(ci.1);
        }
        profile.peak_lag = peak_lag(&profile.lags, &profile.rho);
        out.push(profile);
    }
    Ok(out)
}

fn peak_lag(lags: &[i64], values: &[f64]) -> i64 {
    let mut best = (lags[0], values[0]);
    for (&lag, &v) in lags.iter().zip(values).skip(1) {
        if v > best.1 || (v == best.1 && lag.abs() < best.0.abs()) {
            best = (lag, v);
        }
    }
    best.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WmcLevel {
    pub level: usize,
    pub horizon: String,
    pub phi: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Series whose regression on all others attains the largest R².
    pub leader_index: usize,
    /// R² of every series regressed on the rest.
    pub r_squared: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WmcProfile {
    pub levels: Vec<WmcLevel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WmccLevel {
    pub level: usize,
    pub horizon: String,
    pub leader_index: usize,
    pub lags: Vec<i64>,
    pub phi: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub best_lag: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WmccProfile {
    pub levels: Vec<WmccLevel>,
}

fn check_panel(decs: &[Decomposition]) -> Result<()> {
    if decs.len() < 2 {
        return Err(WaveError::InsufficientData(
            "multiple correlation needs at least two series".into(),
        ));
    }
    for d in &decs[1..] {
        decs[0].compatible(d)?;
    }
    Ok(())
}

/// R² of each column regressed (with intercept) on all other columns,
/// read off the diagonal of the inverse correlation matrix.
fn regression_r2(columns: &[Vec<f64>], level: usize) -> Result<Vec<f64>> {
    let p = columns.len();
    let m = columns[0].len();
    if m <= p {
        return Err(WaveError::InsufficientData(format!(
            "level {level} has {m} usable rows for {p} series"
        )));
    }
    let centered: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / m as f64;
            c.iter().map(|v| v - mean).collect()
        })
        .collect();
    let mut cov = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        for k in i..p {
            let s: f64 = centered[i].iter().zip(&centered[k]).map(|(x, y)| x * y).sum();
            cov[(i, k)] = s;
            cov[(k, i)] = s;
        }
    }
    let scale: Vec<f64> = (0..p).map(|i| cov[(i, i)].sqrt()).collect();
    if scale.iter().any(|&s| s <= 0.0) {
        return Err(WaveError::ZeroVariance { level });
    }
    let corr = DMatrix::from_fn(p, p, |i, k| {
        if i == k {
            1.0
        } else {
            cov[(i, k)] / (scale[i] * scale[k])
        }
    });
    let singular = corr.clone().svd(false, false).singular_values;
    let (smax, smin) = (singular.max(), singular.min());
    if smin <= 1e-12 * smax {
        return Err(WaveError::SingularMatrix { level });
    }
    let inv = corr.try_inverse().ok_or(WaveError::SingularMatrix { level })?;
    Ok((0..p).map(|i| (1.0 - 1.0 / inv[(i, i)]).clamp(0.0, 1.0)).collect())
}

fn argmax_with_tolerance(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] + LEADER_TIE_TOL {
            best = i;
        }
    }
    best
}

/// Columns of unmasked level-`j` coefficients, optionally with one series
/// shifted: row `k` pairs `shifted` at time `k + lag` with the rest at `k`.
fn level_columns(decs: &[Decomposition], j: usize, shifted: Option<(usize, i64)>) -> Vec<Vec<f64>> {
    let mask = decs[0].nonboundary_mask(j);
    let len = mask.len() as i64;
    let (who, lag) = shifted.unwrap_or((usize::MAX, 0));
    let rows: Vec<(usize, usize)> = (0.max(-lag)..len.min(len - lag))
        .map(|k| (k as usize, (k + lag) as usize))
        .filter(|&(k, m)| mask[k] && mask[m])
        .collect();
    decs.iter()
        .enumerate()
        .map(|(i, d)| {
            let det = d.details(j);
            rows.iter()
                .map(|&(k, m)| if i == who { det[m] } else { det[k] })
                .collect()
        })
        .collect()
}

/// Effective size for multiple-correlation bands: usable coefficients / 2^j.
fn wmc_effective_n(rows: usize, j: usize) -> f64 {
    rows as f64 / (1u64 << j) as f64
}

/// Wavelet multiple correlation: per level, the largest coefficient of
/// determination obtained by regressing one series on all the others.
pub fn wmc(decs: &[Decomposition], confidence: f64) -> Result<WmcProfile> {
    check_panel(decs)?;
    check_confidence(confidence)?;
    let mut levels = Vec::with_capacity(decs[0].levels());
    for j in 1..=decs[0].levels() {
        let columns = level_columns(decs, j, None);
        let r2 = regression_r2(&columns, j)?;
        let leader = argmax_with_tolerance(&r2);
        let phi = r2[leader].sqrt();
        let (ci_low, ci_high) = fisher_ci(phi, wmc_effective_n(columns[0].len(), j), confidence);
        levels.push(WmcLevel {
            level: j,
            horizon: horizon_label(j),
            phi,
            ci_low,
            ci_high,
            leader_index: leader,
            r_squared: r2,
        });
    }
    Ok(WmcProfile { levels })
}

/// Wavelet multiple cross-correlation. The leader found at lag zero is held
/// fixed and its coefficients are shifted by each lag; a best lag `> 0`
/// means the rest of the panel leads the leader.
pub fn wmcc(decs: &[Decomposition], max_lag: usize, confidence: f64) -> Result<WmccProfile> {
    let base = wmc(decs, confidence)?;
    let mut levels = Vec::with_capacity(base.levels.len());
    for lvl in &base.levels {
        let j = lvl.level;
        let usable = decs[0].nonboundary_mask(j).iter().filter(|&&b| b).count();
        if 2 * max_lag >= usable {
            return Err(WaveError::param(
                "max_lag",
                format!("{max_lag} is not below half of the {usable} usable coefficients at level {j}"),
            ));
        }
        let leader = lvl.leader_index;
        let mut out = WmccLevel {
            level: j,
            horizon: lvl.horizon.clone(),
            leader_index: leader,
            lags: Vec::new(),
            phi: Vec::new(),
            ci_low: Vec::new(),
            ci_high: Vec::new(),
            best_lag: 0,
        };
        for lag in -(max_lag as i64)..=max_lag as i64 {
            let columns = level_columns(decs, j, Some((leader, lag)));
            let phi = regression_r2(&columns, j)?[leader].sqrt();
            let ci = fisher_ci(phi, wmc_effective_n(columns[0].len(), j), confidence);
            out.lags.push(lag);
            out.phi.push(phi);
            out.ci_low.push(ci.0);
            out.ci_high.push(ci.1);
        }
        out.best_lag = peak_lag(&out.lags, &out.phi);
        levels.push(out);
    }
    Ok(WmccProfile { levels })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaderRow {
    pub level: usize,
    pub horizon: String,
    pub leader: String,
    pub phi: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// The confidence band of phi reaches zero, so the leader is not meaningful.
    pub low_confidence: bool,
}

/// Names the series that leads (maximizes R²) at every level.
pub fn scale_leader_table(decs: &[Decomposition], names: &[String], confidence: f64) -> Result<Vec<LeaderRow>> {
    if names.len() != decs.len() {
        return Err(WaveError::Mismatch(format!(
            "{} names for {} series",
            names.len(),
            decs.len()
        )));
    }
    let profile = wmc(decs, confidence)?;
    Ok(profile
        .levels
        .into_iter()
        .map(|l| LeaderRow {
            level: l.level,
            horizon: l.horizon,
            leader: names[l.leader_index].clone(),
            phi: l.phi,
            ci_low: l.ci_low,
            ci_high: l.ci_high,
            low_confidence: l.ci_low <= 0.0,
        })
        .collect())
}
