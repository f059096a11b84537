use serde::Serialize;
use wavedep::contagion::{event_table, rolling_wavelet_correlation, RollingOptions};
use wavedep::cwt::{significance_montecarlo, MorletParams, SignificanceOptions};
use wavedep::dependence::{scale_leader_table, wavelet_correlation, wavelet_cross_correlation, wmc, wmcc};
use wavedep::longmemory::{
    cluster_markets, default_octaves, estimate_hurst, fractal_connectivity, logscale_diagram, max_octave,
    rolling_hurst, scaling_parameters, synth_fgn, HurstFit, ScalingParams,
};
use wavedep::modwt::{filter, modwt_panel, modwt_transform, BoundaryMode, Decomposition};
use wavedep::report;
use wavedep::series_io::{descriptive_stats, load_panels, log_returns, CsvFormat, GapPolicy, Panel, DATE_FORMAT};
use wavedep::WaveError;

use crate::args::Command;
use crate::config::Settings;
use crate::error::CliError;
use crate::output::Artifact;

type Outputs = Result<Vec<Artifact>, CliError>;

pub fn execute(command: &Command, s: &Settings) -> Outputs {
    match command {
        Command::Stats(_) => stats(s),
        Command::Decompose(_) => decompose(s),
        Command::Wcor(_) => wcor(s),
        Command::Wccor(_) => wccor(s),
        Command::Wmc(_) => multiple(s, false),
        Command::Wmcc(_) => multiple(s, true),
        Command::Leaders(_) => leaders(s),
        Command::Coherence(_) => coherence(s),
        Command::RollingCor(_) => rolling_cor(s),
        Command::ContagionTest(_) => contagion_test(s),
        Command::Logscale(_) => logscale(s),
        Command::Hurst(_) => hurst(s),
        Command::RollingHurst(_) => rolling_hurst_cmd(s),
        Command::Connectivity(_) => connectivity(s),
        Command::SynthFgn(_) => synth(s),
    }
}

/// Loads, aligns and transforms the input panel as requested.
pub fn load(s: &Settings) -> Result<Panel, CliError> {
    if s.inputs.is_empty() {
        return Err(CliError::config("usage", "no input files given"));
    }
    let mut format = if s.long_format {
        CsvFormat::long()
    } else {
        CsvFormat::default()
    };
    format.min_observations = s.min_obs;
    if s.fill {
        format.gaps = GapPolicy::ForwardFill;
    }
    let mut panel = load_panels(&s.inputs, &format)?;
    if s.prices {
        panel = log_returns(&panel)?;
    }
    if s.volatility {
        panel = panel.abs();
    }
    if !s.series.is_empty() {
        let names: Vec<&str> = s.series.iter().map(String::as_str).collect();
        panel = panel.select(&names)?;
    }
    Ok(panel)
}

fn date_labels(panel: &Panel) -> Vec<String> {
    panel
        .dates()
        .iter()
        .map(|d| d.format(DATE_FORMAT).to_string())
        .collect()
}

fn base_index(panel: &Panel, s: &Settings) -> Result<usize, CliError> {
    match &s.base {
        None => Ok(0),
        Some(name) => panel
            .index_of(name)
            .ok_or_else(|| CliError::config("invalid_option", format!("--base `{name}` is not among the inputs"))),
    }
}

fn need_series(panel: &Panel, k: usize, what: &str) -> Result<(), CliError> {
    if panel.n_series() < k {
        return Err(WaveError::InsufficientData(format!(
            "{what} needs at least {k} series, found {}",
            panel.n_series()
        ))
        .into());
    }
    Ok(())
}

/// The pair analysed by two-series commands: the base series and the first
/// other series.
fn pair(panel: &Panel, s: &Settings) -> Result<(usize, usize), CliError> {
    need_series(panel, 2, "this command")?;
    let a = base_index(panel, s)?;
    let b = if a == 0 { 1 } else { 0 };
    Ok((a, b))
}

fn decompose_all(
    panel: &Panel,
    s: &Settings,
    levels: usize,
    boundary: BoundaryMode,
) -> Result<Vec<Decomposition>, CliError> {
    let f = filter(s.filter)?;
    Ok(modwt_panel(panel.values(), levels, &f, boundary)?)
}

/// Default depth: `cap`, reduced until a brickwall level keeps at least four
/// coefficients per period of its equivalent filter.
fn default_levels(s: &Settings, n: usize, cap: usize) -> Result<usize, CliError> {
    let width = filter(s.filter)?.len() - 1;
    Ok((1..=cap)
        .rev()
        .find(|&j| n.saturating_sub(((1usize << j) - 1) * width) >> j >= 4)
        .unwrap_or(1))
}

fn json<T: Serialize>(value: &T) -> Result<Artifact, CliError> {
    Ok(Artifact::new("json", report::to_json(value)?))
}

fn stats(s: &Settings) -> Outputs {
    let panel = load(s)?;
    let rows = descriptive_stats(&panel)?;
    Ok(vec![Artifact::new("csv", report::stats_csv(&rows)?), json(&rows)?])
}

fn decompose(s: &Settings) -> Outputs {
    let panel = load(s)?;
    let i = base_index(&panel, s)?;
    let f = filter(s.filter)?;
    let dec = modwt_transform(
        panel.series(i),
        s.levels.unwrap_or(6),
        &f,
        s.boundary.unwrap_or(BoundaryMode::Brickwall),
    )?;
    Ok(vec![Artifact::new("csv", report::decomposition_csv(&dec)?)])
}

fn wcor(s: &Settings) -> Outputs {
    let panel = load(s)?;
    need_series(&panel, 2, "wcor")?;
    let base = base_index(&panel, s)?;
    let levels = match s.levels {
        Some(l) => l,
        None => default_levels(s, panel.n_obs(), 6)?,
    };
    let decs = decompose_all(&panel, s, levels, s.boundary.unwrap_or(BoundaryMode::Brickwall))?;
    let names = panel.names();
    let profiles = (0..panel.n_series())
        .filter(|&i| i != base)
        .map(|i| {
            Ok((
                names[i].clone(),
                wavelet_correlation(&decs[base], &decs[i], s.confidence)?,
            ))
        })
        .collect::<Result<Vec<_>, WaveError>>()?;
    Ok(vec![
        Artifact::new("csv", report::correlation_table_csv(&profiles)?),
        json(&profiles)?,
    ])
}

fn wccor(s: &Settings) -> Outputs {
    let panel = load(s)?;
    need_series(&panel, 2, "wccor")?;
    let base = base_index(&panel, s)?;
    let levels = match s.levels {
        Some(l) => l,
        None => default_levels(s, panel.n_obs(), 6)?,
    };
    let decs = decompose_all(&panel, s, levels, s.boundary.unwrap_or(BoundaryMode::Brickwall))?;
    let names = panel.names();
    let mut csv = String::new();
    let mut all = Vec::new();
    for i in (0..panel.n_series()).filter(|&i| i != base) {
        let label = format!("{}-{}", names[base], names[i]);
        let profiles = wavelet_cross_correlation(&decs[base], &decs[i], s.max_lag, s.confidence)?;
        let table = report::cross_correlation_csv(&label, &profiles)?;
        if csv.is_empty() {
            csv.push_str(&table);
        } else {
            // Drop the repeated header.
            csv.push_str(table.split_once('\n').map_or("", |(_, rest)| rest));
        }
        all.push((label, profiles));
    }
    Ok(vec![Artifact::new("csv", csv), json(&all)?])
}

#[derive(Serialize)]
struct Named<'a, T> {
    series: &'a [String],
    #[serde(flatten)]
    result: T,
}

fn multiple(s: &Settings, lagged: bool) -> Outputs {
    let panel = load(s)?;
    need_series(&panel, 2, if lagged { "wmcc" } else { "wmc" })?;
    let levels = match s.levels {
        Some(l) => l,
        None => default_levels(s, panel.n_obs(), 8)?,
    };
    let decs = decompose_all(&panel, s, levels, s.boundary.unwrap_or(BoundaryMode::Brickwall))?;
    let names = panel.names();
    let out = if lagged {
        json(&Named {
            series: names,
            result: wmcc(&decs, s.max_lag, s.confidence)?,
        })?
    } else {
        json(&Named {
            series: names,
            result: wmc(&decs, s.confidence)?,
        })?
    };
    Ok(vec![out])
}

fn leaders(s: &Settings) -> Outputs {
    let panel = load(s)?;
    need_series(&panel, 2, "leaders")?;
    let levels = match s.levels {
        Some(l) => l,
        None => default_levels(s, panel.n_obs(), 8)?,
    };
    let decs = decompose_all(&panel, s, levels, s.boundary.unwrap_or(BoundaryMode::Brickwall))?;
    let rows = scale_leader_table(&decs, panel.names(), s.confidence)?;
    Ok(vec![
        Artifact::new("csv", report::leader_table_csv(&rows)?),
        json(&rows)?,
    ])
}

#[derive(Serialize)]
struct CoherenceSummary<'a> {
    pair: [&'a str; 2],
    n: usize,
    n_scales: usize,
    params: MorletParams,
    significance: SignificanceOptions,
    significant_fraction_in_coi: Option<f64>,
}

fn coherence(s: &Settings) -> Outputs {
    let panel = load(s)?;
    let (a, b) = pair(&panel, s)?;
    let params = MorletParams::for_length(panel.n_obs());
    let opts = SignificanceOptions {
        n_surrogates: s.surrogates,
        quantile: s.quantile,
        seed: s.seed,
        pooling: s.pooling,
    };
    let field = significance_montecarlo(panel.series(a), panel.series(b), &params, &opts)?;
    let names = panel.names();
    let title = format!("Wavelet coherence {} / {}", names[a], names[b]);
    let summary = CoherenceSummary {
        pair: [&names[a], &names[b]],
        n: panel.n_obs(),
        n_scales: params.n_scales,
        params,
        significance: opts,
        significant_fraction_in_coi: field.significant_fraction_in_coi(),
    };
    Ok(vec![
        Artifact::new("csv", report::coherence_csv(&field, &date_labels(&panel))?),
        Artifact::new("svg", report::coherence_svg(&field, &title, s.arrow_every)),
        json(&summary)?,
    ])
}

fn rolling_options(s: &Settings) -> RollingOptions {
    let d = RollingOptions::default();
    RollingOptions {
        levels: s.levels.unwrap_or(d.levels),
        window: s.window.unwrap_or(d.window),
        step: s.step.unwrap_or(d.step),
        filter: s.filter,
        boundary: s.boundary.unwrap_or(d.boundary),
    }
}

fn rolling_cor(s: &Settings) -> Outputs {
    let panel = load(s)?;
    let (a, b) = pair(&panel, s)?;
    let series = rolling_wavelet_correlation(panel.series(a), panel.series(b), &rolling_options(s))?;
    let dates = date_labels(&panel);
    let labels: Vec<String> = series
        .first()
        .map(|r| r.anchors.iter().map(|&i| dates[i].clone()).collect())
        .unwrap_or_default();
    Ok(vec![Artifact::new(
        "csv",
        report::rolling_correlation_csv(&series, &labels)?,
    )])
}

fn contagion_test(s: &Settings) -> Outputs {
    let event_date = s
        .event
        .ok_or_else(|| CliError::config("usage", "contagion-test needs --event YYYY-MM-DD"))?;
    let panel = load(s)?;
    let (a, b) = pair(&panel, s)?;
    // First observation on or after the event date.
    let event = panel.dates().partition_point(|d| *d < event_date);
    if event == 0 || event >= panel.n_obs() {
        return Err(WaveError::InvalidParameter {
            name: "event",
            reason: format!("{event_date} is not inside the sample"),
        }
        .into());
    }
    let series = rolling_wavelet_correlation(panel.series(a), panel.series(b), &rolling_options(s))?;
    let rows = event_table(&series, event, s.pre, s.post)?;
    let names = panel.names();
    let label = format!("{}-{}", names[a], names[b]);
    let event_text = match &s.event_label {
        Some(l) => format!("{l} ({event_date})"),
        None => event_date.to_string(),
    };
    Ok(vec![
        Artifact::new("csv", report::contagion_table_csv(&label, &event_text, &rows)?),
        json(&rows)?,
    ])
}

fn octaves(s: &Settings, n: usize) -> (usize, usize) {
    let (d1, d2) = default_octaves(n);
    (s.j1.unwrap_or(d1), s.j2.unwrap_or(d2))
}

fn logscale(s: &Settings) -> Outputs {
    let panel = load(s)?;
    let i = base_index(&panel, s)?;
    let (j1, j2) = octaves(s, panel.n_obs());
    let f = filter(s.filter)?;
    let diagram = logscale_diagram(panel.series(i), j1, j2, &f, s.confidence)?;
    let title = format!("Logscale diagram {}", panel.names()[i]);
    Ok(vec![
        Artifact::new("csv", report::logscale_csv(&diagram)?),
        Artifact::new("svg", report::logscale_svg(&diagram, &title)),
        json(&diagram)?,
    ])
}

#[derive(Serialize)]
struct HurstRow<'a> {
    series: &'a str,
    fit: &'a HurstFit,
    scaling: &'a ScalingParams,
}

fn hurst(s: &Settings) -> Outputs {
    let panel = load(s)?;
    let (j1, j2) = octaves(s, panel.n_obs());
    let f = filter(s.filter)?;
    let rows = panel
        .names()
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let fit = estimate_hurst(panel.series(i), j1, j2, &f)?;
            let scaling = scaling_parameters(&fit, s.confidence);
            Ok((name.clone(), fit, scaling))
        })
        .collect::<Result<Vec<_>, WaveError>>()?;
    let rendered: Vec<HurstRow> = rows
        .iter()
        .map(|(series, fit, scaling)| HurstRow { series, fit, scaling })
        .collect();
    Ok(vec![
        Artifact::new("csv", report::hurst_table_csv(&rows)?),
        json(&rendered)?,
    ])
}

fn rolling_hurst_cmd(s: &Settings) -> Outputs {
    let panel = load(s)?;
    let window = s.window.unwrap_or(260);
    let step = s.step.unwrap_or(24);
    // Deepest octave whose coefficients still fill four periods of the window.
    let fitting = (1..=8).rev().find(|&j| window >= 4usize << j).unwrap_or(1);
    let j1 = s.j1.unwrap_or(2);
    let j2 = s.j2.unwrap_or(fitting);
    let f = filter(s.filter)?;
    let dates = date_labels(&panel);
    let mut csv = String::new();
    for (i, name) in panel.names().iter().enumerate() {
        let points = rolling_hurst(panel.series(i), window, step, j1, j2, &f)?;
        let labels: Vec<String> = points.iter().map(|p| dates[p.anchor].clone()).collect();
        let table = report::rolling_hurst_csv(name, &points, &labels)?;
        if csv.is_empty() {
            csv.push_str(&table);
        } else {
            csv.push_str(table.split_once('\n').map_or("", |(_, rest)| rest));
        }
    }
    Ok(vec![Artifact::new("csv", csv)])
}

fn connectivity(s: &Settings) -> Outputs {
    let panel = load(s)?;
    need_series(&panel, 2, "connectivity")?;
    let n = panel.n_obs();
    // Coarsest octave keeping at least eight coefficients per period.
    let coarsest = (1..=8)
        .rev()
        .find(|&j| n >> j >= 8)
        .unwrap_or(1)
        .min(max_octave(n).max(1));
    let j2 = s.j2.unwrap_or(coarsest);
    let j1 = s.j1.unwrap_or_else(|| j2.saturating_sub(3).max(1));
    let decs = decompose_all(&panel, s, j2, s.boundary.unwrap_or(BoundaryMode::Periodic))?;
    let result = fractal_connectivity(&decs, j1, j2, s.tolerance)?;
    let clustering = cluster_markets(&result.f, s.cut)?;
    let names = panel.names();
    #[derive(Serialize)]
    struct Out<'a> {
        series: &'a [String],
        connectivity: &'a wavedep::longmemory::ConnectivityResult,
        clustering: &'a wavedep::longmemory::Clustering,
    }
    Ok(vec![
        Artifact::new("csv", report::connectivity_csv(names, &result, &clustering)?),
        Artifact::new(
            "svg",
            report::connectivity_svg(names, &result, &clustering, "Fractal connectivity"),
        ),
        json(&Out {
            series: names,
            connectivity: &result,
            clustering: &clustering,
        })?,
    ])
}

fn synth(s: &Settings) -> Outputs {
    let h = s
        .hurst
        .ok_or_else(|| CliError::config("usage", "synth-fgn needs --H"))?;
    let x = synth_fgn(h, s.n, s.seed)?;
    let start = chrono::NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    let dates: Vec<String> = start
        .iter_days()
        .take(s.n)
        .map(|d| d.format(DATE_FORMAT).to_string())
        .collect();
    Ok(vec![Artifact::new("csv", report::series_csv("fgn", &dates, &x)?)])
}
