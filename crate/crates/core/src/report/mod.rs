//! Plain-text renderings (CSV, JSON, SVG) of analysis results.
//!
//! Every renderer is a pure function of its inputs and formats floats with
//! Rust's shortest round-trip representation, so identical results always
//! produce byte-identical files.

mod svg;

use serde::Serialize;

use crate::contagion::{EventTestResult, RollingCorrSeries};
use crate::cwt::CoherenceField;
use crate::dependence::{CrossCorrProfile, LeaderRow, ScaleProfile};
use crate::error::{Result, WaveError};
use crate::longmemory::{Clustering, ConnectivityResult, HurstFit, LogscaleDiagram, RollingHurstPoint, ScalingParams};
use crate::modwt::Decomposition;
use crate::series_io::StatsSummary;

pub use svg::{coherence_svg, connectivity_svg, logscale_svg};

fn csv_string(header: &[String], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| WaveError::param("output", format!("cannot render CSV: {e}"));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| WaveError::param("output", format!("cannot render CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV built from UTF-8 fields"))
}

fn owned(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| WaveError::param("output", format!("cannot render JSON: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Stars for the 1% (`**`) and 5% (`*`) levels.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

pub fn stats_csv(rows: &[StatsSummary]) -> Result<String> {
    let header = owned(&[
        "series",
        "count",
        "mean",
        "median",
        "min",
        "max",
        "std_dev",
        "skewness",
        "excess_kurtosis",
        "jarque_bera",
    ]);
    let body = rows
        .iter()
        .map(|s| {
            vec![
                s.name.clone(),
                s.count.to_string(),
                s.mean.to_string(),
                s.median.to_string(),
                s.min.to_string(),
                s.max.to_string(),
                s.std_dev.to_string(),
                opt(s.skewness),
                opt(s.excess_kurtosis),
                opt(s.jarque_bera),
            ]
        })
        .collect();
    csv_string(&header, body)
}

/// Long-format coefficient dump: one row per (level, index). The smooth is
/// labelled `s{J}`.
pub fn decomposition_csv(dec: &Decomposition) -> Result<String> {
    let header = owned(&["level", "index", "coefficient", "is_boundary"]);
    let mut rows = Vec::with_capacity((dec.levels() + 1) * dec.len());
    for j in 1..=dec.levels() {
        for (t, (c, keep)) in dec.details(j).iter().zip(dec.nonboundary_mask(j)).enumerate() {
            rows.push(vec![format!("d{j}"), t.to_string(), c.to_string(), (!keep).to_string()]);
        }
    }
    let last_mask = dec.nonboundary_mask(dec.levels());
    for (t, (c, keep)) in dec.smooth().iter().zip(last_mask).enumerate() {
        rows.push(vec![
            format!("s{}", dec.levels()),
            t.to_string(),
            c.to_string(),
            (!keep).to_string(),
        ]);
    }
    csv_string(&header, rows)
}

/// Correlation table: one row per horizon, and for each counterpart series
/// the estimate followed by its interval.
pub fn correlation_table_csv(profiles: &[(String, ScaleProfile)]) -> Result<String> {
    let first = profiles
        .first()
        .ok_or_else(|| WaveError::InsufficientData("no correlation profiles to render".into()))?;
    let mut header = owned(&["level", "horizon"]);
    for (name, _) in profiles {
        header.push(name.clone());
        header.push(format!("{name}_ci_low"));
        header.push(format!("{name}_ci_high"));
    }
    let rows = (0..first.1.levels.len())
        .map(|i| {
            let mut row = vec![first.1.levels[i].to_string(), first.1.horizon_labels[i].clone()];
            for (_, p) in profiles {
                row.push(p.estimate[i].to_string());
                row.push(p.ci_low[i].to_string());
                row.push(p.ci_high[i].to_string());
            }
            row
        })
        .collect();
    csv_string(&header, rows)
}

pub fn cross_correlation_csv(pair: &str, profiles: &[CrossCorrProfile]) -> Result<String> {
    let header = owned(&["pair", "level", "horizon", "lag", "rho", "ci_low", "ci_high", "is_peak"]);
    let mut rows = Vec::new();
    for p in profiles {
        for i in 0..p.lags.len() {
            rows.push(vec![
                pair.to_string(),
                p.level.to_string(),
                p.horizon.clone(),
                p.lags[i].to_string(),
                p.rho[i].to_string(),
                p.ci_low[i].to_string(),
                p.ci_high[i].to_string(),
                (p.lags[i] == p.peak_lag).to_string(),
            ]);
        }
    }
    csv_string(&header, rows)
}

pub fn leader_table_csv(rows: &[LeaderRow]) -> Result<String> {
    let header = owned(&[
        "level",
        "horizon",
        "leader",
        "phi",
        "ci_low",
        "ci_high",
        "low_confidence",
    ]);
    let body = rows
        .iter()
        .map(|r| {
            vec![
                r.level.to_string(),
                r.horizon.clone(),
                r.leader.clone(),
                r.phi.to_string(),
                r.ci_low.to_string(),
                r.ci_high.to_string(),
                r.low_confidence.to_string(),
            ]
        })
        .collect();
    csv_string(&header, body)
}

/// Dense coherence dump, one row per (time, scale) cell.
pub fn coherence_csv(field: &CoherenceField, times: &[String]) -> Result<String> {
    let header = owned(&["time", "scale", "period", "r2", "phase", "in_coi", "significant"]);
    let mut rows = Vec::with_capacity(field.len() * field.scales.len());
    for t in 0..field.len() {
        for s in 0..field.scales.len() {
            let sig = match &field.sig_mask {
                Some(m) => m[s][t].to_string(),
                None => "NA".into(),
            };
            rows.push(vec![
                times[t].clone(),
                field.scales[s].to_string(),
                field.periods[s].to_string(),
                field.r2[s][t].to_string(),
                field.phase[s][t].to_string(),
                field.inside_coi(s, t).to_string(),
                sig,
            ]);
        }
    }
    csv_string(&header, rows)
}

/// Rolling correlations in wide form: one row per window end, one column per level.
pub fn rolling_correlation_csv(series: &[RollingCorrSeries], anchor_labels: &[String]) -> Result<String> {
    let mut header = owned(&["window_end"]);
    header.extend(series.iter().map(|s| format!("d{}", s.level)));
    let count = series.first().map(|s| s.rho.len()).unwrap_or(0);
    let rows = (0..count)
        .map(|i| {
            let mut row = vec![anchor_labels[i].clone()];
            row.extend(series.iter().map(|s| s.rho[i].to_string()));
            row
        })
        .collect();
    csv_string(&header, rows)
}

/// Before/after table with significance stars.
pub fn contagion_table_csv(pair: &str, event: &str, rows: &[EventTestResult]) -> Result<String> {
    let header = owned(&[
        "pair", "event", "level", "horizon", "before", "after", "t_stat", "df", "p_value", "stars", "n_before",
        "n_after",
    ]);
    let body = rows
        .iter()
        .map(|r| {
            vec![
                pair.to_string(),
                event.to_string(),
                r.level.to_string(),
                r.horizon.clone(),
                r.mean_before.to_string(),
                r.mean_after.to_string(),
                r.t_stat.to_string(),
                r.df.to_string(),
                r.p_value.to_string(),
                significance_stars(r.p_value).to_string(),
                r.n_before.to_string(),
                r.n_after.to_string(),
            ]
        })
        .collect();
    csv_string(&header, body)
}

pub fn logscale_csv(diagram: &LogscaleDiagram) -> Result<String> {
    let header = owned(&["j", "eta", "ci_low", "ci_high", "n_j", "in_fit"]);
    let rows = (0..diagram.octaves.len())
        .map(|i| {
            let j = diagram.octaves[i];
            vec![
                j.to_string(),
                diagram.eta[i].to_string(),
                diagram.ci_low[i].to_string(),
                diagram.ci_high[i].to_string(),
                diagram.n_j[i].to_string(),
                (diagram.fit.j1..=diagram.fit.j2).contains(&j).to_string(),
            ]
        })
        .collect();
    csv_string(&header, rows)
}

/// Hurst table with the implied scaling parameters.
pub fn hurst_table_csv(rows: &[(String, HurstFit, ScalingParams)]) -> Result<String> {
    let header = owned(&[
        "series",
        "hurst",
        "std_err",
        "t_value",
        "p_value",
        "j1",
        "j2",
        "alpha",
        "holder",
        "fractal_dim",
        "cf",
    ]);
    let body = rows
        .iter()
        .map(|(name, fit, sp)| {
            vec![
                name.clone(),
                fit.hurst.to_string(),
                fit.std_err.to_string(),
                fit.t_value.to_string(),
                fit.p_value.to_string(),
                fit.j1.to_string(),
                fit.j2.to_string(),
                sp.alpha.to_string(),
                sp.holder.to_string(),
                sp.fractal_dim.to_string(),
                sp.cf.to_string(),
            ]
        })
        .collect();
    csv_string(&header, body)
}

pub fn rolling_hurst_csv(series: &str, points: &[RollingHurstPoint], anchor_labels: &[String]) -> Result<String> {
    let header = owned(&[
        "series",
        "window_end",
        "hurst",
        "std_err",
        "t_value",
        "p_value",
        "above_half",
    ]);
    let rows = points
        .iter()
        .zip(anchor_labels)
        .map(|(p, label)| {
            vec![
                series.to_string(),
                label.clone(),
                p.fit.hurst.to_string(),
                p.fit.std_err.to_string(),
                p.fit.t_value.to_string(),
                p.fit.p_value.to_string(),
                (p.fit.hurst > 0.5).to_string(),
            ]
        })
        .collect();
    csv_string(&header, rows)
}

/// Connectivity matrix with cluster labels as a trailing column.
pub fn connectivity_csv(names: &[String], result: &ConnectivityResult, clustering: &Clustering) -> Result<String> {
    let mut header = owned(&["series"]);
    header.extend(names.iter().cloned());
    header.push("cluster".into());
    let rows = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut row = vec![name.clone()];
            row.extend(result.f[i].iter().map(|v| v.to_string()));
            row.push(clustering.labels[i].to_string());
            row
        })
        .collect();
    csv_string(&header, rows)
}

pub fn series_csv(column: &str, dates: &[String], values: &[f64]) -> Result<String> {
    let header = owned(&["date", column]);
    let rows = dates
        .iter()
        .zip(values)
        .map(|(d, v)| vec![d.clone(), v.to_string()])
        .collect();
    csv_string(&header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modwt::{build_filter, modwt_transform, BoundaryMode};

    #[test]
    fn decomposition_export_layout() {
        let x: Vec<f64> = (0..16).map(|t| (t as f64).sin()).collect();
        let dec = modwt_transform(&x, 2, &build_filter("la8").unwrap(), BoundaryMode::Brickwall).unwrap();
        let csv = decomposition_csv(&dec).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "level,index,coefficient,is_boundary");
        assert_eq!(lines.len(), 1 + 3 * 16);
        assert!(lines[1].starts_with("d1,0,") && lines[1].ends_with(",true"));
        assert!(lines[8].starts_with("d1,7,") && lines[8].ends_with(",false"));
        assert!(lines[33].starts_with("s2,0,"));
    }

    #[test]
    fn stars() {
        assert_eq!(significance_stars(0.001), "**");
        assert_eq!(significance_stars(0.03), "*");
        assert_eq!(significance_stars(0.2), "");
    }

    #[test]
    fn missing_moments_render_as_na() {
        let s = crate::series_io::summarize("flat", &[1.0; 8]).unwrap();
        let csv = stats_csv(&[s]).unwrap();
        assert!(csv.lines().nth(1).unwrap().ends_with("NA,NA,NA"));
    }
}
