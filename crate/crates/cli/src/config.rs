//! Option resolution: command-line flag, then config file, then default.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use wavedep::cwt::Pooling;
use wavedep::longmemory::Cut;
use wavedep::modwt::{BoundaryMode, FilterKind};
use wavedep::series_io::{DATE_FORMAT, DEFAULT_MIN_OBSERVATIONS};

use crate::args::Opts;
use crate::error::CliError;

pub const OUT_DIR_ENV: &str = "WAVEDEP_OUT_DIR";

const KNOWN_KEYS: &[&str] = &[
    "inputs",
    "out_dir",
    "tag",
    "seed",
    "format",
    "kind",
    "volatility",
    "fill",
    "series",
    "base",
    "min_obs",
    "filter",
    "levels",
    "boundary",
    "confidence",
    "max_lag",
    "window",
    "step",
    "event",
    "event_label",
    "pre",
    "post",
    "surrogates",
    "quantile",
    "pooling",
    "arrow_every",
    "j1",
    "j2",
    "tolerance",
    "clusters",
    "height",
    "hurst",
    "n",
];

/// Parsed `key = value` config file. Blank lines and `#` comments are skipped;
/// keys may use dashes or underscores.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|msg| CliError::config("config", format!("{}: {msg}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
            let mut key = key.trim().to_ascii_lowercase().replace('-', "_");
            // Accept the flag spellings of the synthesis options and the input list.
            match key.as_str() {
                "h" => key = "hurst".into(),
                "input" => key = "inputs".into(),
                _ => {}
            }
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key `{key}`", i + 1));
            }
            let value = value.trim().trim_matches('"').to_string();
            if values.insert(key.clone(), value).is_some() {
                return Err(format!("line {}: `{key}` given twice", i + 1));
            }
        }
        Ok(ConfigFile { values })
    }

    fn get<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::config("config", format!("`{key}` = `{v}`: {e}")))
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Vec<String> {
        self.values
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            })
            .unwrap_or_default()
    }
}

/// Fully resolved and validated options. Values whose default depends on the
/// subcommand stay optional here.
#[derive(Debug, Clone)]
pub struct Settings {
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub tag: Option<String>,
    pub seed: u64,
    pub long_format: bool,
    pub prices: bool,
    pub volatility: bool,
    pub fill: bool,
    pub series: Vec<String>,
    pub base: Option<String>,
    pub min_obs: usize,
    pub filter: FilterKind,
    pub levels: Option<usize>,
    pub boundary: Option<BoundaryMode>,
    pub confidence: f64,
    pub max_lag: usize,
    pub window: Option<usize>,
    pub step: Option<usize>,
    pub event: Option<NaiveDate>,
    pub event_label: Option<String>,
    pub pre: usize,
    pub post: usize,
    pub surrogates: usize,
    pub quantile: f64,
    pub pooling: Pooling,
    pub arrow_every: usize,
    pub j1: Option<usize>,
    pub j2: Option<usize>,
    pub tolerance: f64,
    pub cut: Cut,
    pub hurst: Option<f64>,
    pub n: usize,
}

fn layer<T>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>, CliError>
where
    T: FromStr,
    T::Err: Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

fn parse_choice<T>(raw: Option<String>, key: &str) -> Result<Option<T>, CliError>
where
    T: FromStr,
    T::Err: Display,
{
    raw.map(|v| {
        v.parse::<T>()
            .map_err(|e| CliError::config("invalid_option", format!("--{key}: {e}")))
    })
    .transpose()
}

fn check(ok: bool, key: &str, reason: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::config("invalid_option", format!("--{key} {reason}")))
    }
}

impl Settings {
    pub fn resolve(opts: &Opts, env_out_dir: Option<PathBuf>) -> Result<Self, CliError> {
        let file = match &opts.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };

        let inputs = if opts.inputs.is_empty() {
            file.list("inputs").into_iter().map(PathBuf::from).collect()
        } else {
            opts.inputs.clone()
        };
        let series = if opts.series.is_empty() {
            file.list("series")
        } else {
            opts.series.clone()
        };
        let out_dir = opts
            .out_dir
            .clone()
            .or(env_out_dir)
            .or(file.get::<PathBuf>("out_dir")?)
            .unwrap_or_else(|| PathBuf::from("."));

        let format = layer(opts.format.clone(), &file, "format")?;
        let long_format = match format.as_deref() {
            None | Some("wide") => false,
            Some("long") => true,
            Some(other) => {
                return Err(CliError::config(
                    "invalid_option",
                    format!("--format must be wide or long, got `{other}`"),
                ))
            }
        };
        let kind = layer(opts.kind.clone(), &file, "kind")?;
        let prices = match kind.as_deref() {
            None | Some("returns") => false,
            Some("prices") => true,
            Some(other) => {
                return Err(CliError::config(
                    "invalid_option",
                    format!("--kind must be prices or returns, got `{other}`"),
                ))
            }
        };
        let pooling = match layer(opts.pooling.clone(), &file, "pooling")?.as_deref() {
            None | Some("per-scale") | Some("per_scale") => Pooling::PerScale,
            Some("per-cell") | Some("per_cell") => Pooling::PerCell,
            Some(other) => {
                return Err(CliError::config(
                    "invalid_option",
                    format!("--pooling must be per-scale or per-cell, got `{other}`"),
                ))
            }
        };
        let event = layer(opts.event.clone(), &file, "event")?
            .map(|d| {
                NaiveDate::parse_from_str(&d, DATE_FORMAT)
                    .map_err(|e| CliError::config("invalid_option", format!("--event `{d}`: {e}")))
            })
            .transpose()?;

        let clusters: Option<usize> = layer(opts.clusters, &file, "clusters")?;
        let height: Option<f64> = layer(opts.height, &file, "height")?;
        let cut = match (clusters, height) {
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "invalid_option",
                    "--clusters and --height are mutually exclusive",
                ))
            }
            (Some(k), None) => Cut::Clusters(k),
            (None, Some(h)) => Cut::Height(h),
            (None, None) => Cut::Clusters(2),
        };

        let s = Settings {
            inputs,
            out_dir,
            tag: layer(opts.tag.clone(), &file, "tag")?,
            seed: layer(opts.seed, &file, "seed")?.unwrap_or(0),
            long_format,
            prices,
            volatility: opts.volatility || file.get("volatility")?.unwrap_or(false),
            fill: opts.fill || file.get("fill")?.unwrap_or(false),
            series,
            base: layer(opts.base.clone(), &file, "base")?,
            min_obs: layer(opts.min_obs, &file, "min_obs")?.unwrap_or(DEFAULT_MIN_OBSERVATIONS),
            filter: parse_choice(layer(opts.filter.clone(), &file, "filter")?, "filter")?.unwrap_or(FilterKind::La8),
            levels: layer(opts.levels, &file, "levels")?,
            boundary: parse_choice(layer(opts.boundary.clone(), &file, "boundary")?, "boundary")?,
            confidence: layer(opts.confidence, &file, "confidence")?.unwrap_or(0.95),
            max_lag: layer(opts.max_lag, &file, "max_lag")?.unwrap_or(20),
            window: layer(opts.window, &file, "window")?,
            step: layer(opts.step, &file, "step")?,
            event,
            event_label: layer(opts.event_label.clone(), &file, "event_label")?,
            pre: layer(opts.pre, &file, "pre")?.unwrap_or(250),
            post: layer(opts.post, &file, "post")?.unwrap_or(250),
            surrogates: layer(opts.surrogates, &file, "surrogates")?.unwrap_or(300),
            quantile: layer(opts.quantile, &file, "quantile")?.unwrap_or(0.95),
            pooling,
            arrow_every: layer(opts.arrow_every, &file, "arrow_every")?.unwrap_or(8),
            j1: layer(opts.j1, &file, "j1")?,
            j2: layer(opts.j2, &file, "j2")?,
            tolerance: layer(opts.tolerance, &file, "tolerance")?.unwrap_or(0.1),
            cut,
            hurst: layer(opts.hurst, &file, "hurst")?,
            n: layer(opts.n, &file, "n")?.unwrap_or(4096),
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), CliError> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        check(
            open_unit(self.confidence),
            "confidence",
            "must lie strictly between 0 and 1",
        )?;
        check(
            open_unit(self.quantile),
            "quantile",
            "must lie strictly between 0 and 1",
        )?;
        check(self.surrogates >= 100, "surrogates", "must be at least 100")?;
        check(self.levels.is_none_or(|l| l >= 1), "levels", "must be at least 1")?;
        check(self.window.is_none_or(|w| w >= 2), "window", "must be at least 2")?;
        check(self.step.is_none_or(|s| s >= 1), "step", "must be at least 1")?;
        check(self.pre >= 2 && self.post >= 2, "pre/--post", "must be at least 2")?;
        check(self.min_obs >= 2, "min-obs", "must be at least 2")?;
        check(self.arrow_every >= 1, "arrow-every", "must be at least 1")?;
        check(self.j1.is_none_or(|j| j >= 1), "j1", "must be at least 1")?;
        if let (Some(j1), Some(j2)) = (self.j1, self.j2) {
            check(j2 > j1, "j2", "must exceed --j1")?;
        }
        check(self.tolerance > 0.0, "tolerance", "must be positive")?;
        match self.cut {
            Cut::Clusters(k) => check(k >= 1, "clusters", "must be at least 1")?,
            Cut::Height(h) => check(h.is_finite() && h >= 0.0, "height", "must be a non-negative number")?,
        }
        check(
            self.hurst.is_none_or(open_unit),
            "H",
            "must lie strictly between 0 and 1",
        )?;
        check(self.n >= 2, "n", "must be at least 2")?;
        if let Some(tag) = &self.tag {
            check(
                !tag.is_empty() && tag.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c)),
                "tag",
                "may only contain letters, digits, `.`, `_` and `-`",
            )?;
        }
        Ok(())
    }
}
