//! Panel ingestion, date alignment, log returns and descriptive statistics.
//!
//! A [`Panel`] is the universal input of every analysis: a set of named series
//! sharing one strictly increasing calendar. Loading never produces NaN; rows
//! with gaps are either dropped (intersection alignment, the default) or
//! forward-filled when explicitly requested.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Result, WaveError};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// Minimum number of aligned observations accepted by [`load_panel`] unless
/// overridden in [`CsvFormat`].
pub const DEFAULT_MIN_OBSERVATIONS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    names: Vec<String>,
    dates: Vec<NaiveDate>,
    values: Vec<Vec<f64>>,
}

impl Panel {
    pub fn new(names: Vec<String>, dates: Vec<NaiveDate>, values: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(WaveError::param(
                "values",
                format!("{} names but {} series", names.len(), values.len()),
            ));
        }
        if names.is_empty() {
            return Err(WaveError::InsufficientData("panel has no series".into()));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(WaveError::param(
                "dates",
                format!("dates must be strictly increasing ({} then {})", w[0], w[1]),
            ));
        }
        for (name, row) in names.iter().zip(&values) {
            if row.len() != dates.len() {
                return Err(WaveError::param(
                    "values",
                    format!("series `{name}` has {} values for {} dates", row.len(), dates.len()),
                ));
            }
            if let Some(pos) = row.iter().position(|v| !v.is_finite()) {
                return Err(WaveError::param(
                    "values",
                    format!("series `{name}` has a non-finite value on {}", dates[pos]),
                ));
            }
        }
        Ok(Panel { names, dates, values })
    }

    /// Panel with synthetic consecutive daily dates starting at 2000-01-01.
    pub fn from_series(names: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.first().map_or(0, Vec::len);
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let dates = start.iter_days().take(n).collect();
        Panel::new(names, dates, values)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn series(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn n_series(&self) -> usize {
        self.names.len()
    }

    pub fn n_obs(&self) -> usize {
        self.dates.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Panel restricted to the named series, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Panel> {
        let mut out_names = Vec::with_capacity(names.len());
        let mut out_values = Vec::with_capacity(names.len());
        for name in names {
            let i = self
                .index_of(name)
                .ok_or_else(|| WaveError::param("series", format!("no series named `{name}`")))?;
            out_names.push(self.names[i].clone());
            out_values.push(self.values[i].clone());
        }
        Panel::new(out_names, self.dates.clone(), out_values)
    }

    /// Element-wise absolute values, the volatility proxy for long-memory runs.
    pub fn abs(&self) -> Panel {
        Panel {
            names: self.names.clone(),
            dates: self.dates.clone(),
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(|v| v.abs()).collect())
                .collect(),
        }
    }

    /// Index of the first date on or after `date`.
    pub fn date_index(&self, date: NaiveDate) -> Option<usize> {
        let i = self.dates.partition_point(|d| *d < date);
        (i < self.dates.len()).then_some(i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CsvLayout {
    /// One date column plus one value column per series. `value_columns = None`
    /// takes every non-date column.
    Wide {
        date_column: String,
        value_columns: Option<Vec<String>>,
    },
    /// Rows of `(date, name, value)`.
    Long {
        date_column: String,
        name_column: String,
        value_column: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapPolicy {
    /// Keep only dates on which every series is observed.
    #[default]
    Intersect,
    /// Carry the last observation forward over gaps, starting from the first
    /// date on which every series has been observed at least once.
    ForwardFill,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvFormat {
    pub layout: CsvLayout,
    pub gaps: GapPolicy,
    pub min_observations: usize,
}

impl Default for CsvFormat {
    fn default() -> Self {
        CsvFormat {
            layout: CsvLayout::Wide {
                date_column: "date".into(),
                value_columns: None,
            },
            gaps: GapPolicy::Intersect,
            min_observations: DEFAULT_MIN_OBSERVATIONS,
        }
    }
}

impl CsvFormat {
    pub fn long() -> Self {
        CsvFormat {
            layout: CsvLayout::Long {
                date_column: "date".into(),
                name_column: "name".into(),
                value_column: "value".into(),
            },
            ..CsvFormat::default()
        }
    }
}

/// Raw observations of one series keyed by date; `None` marks an empty cell.
type RawSeries = BTreeMap<NaiveDate, Option<f64>>;

/// Loads a single CSV file into an aligned panel.
pub fn load_panel(path: impl AsRef<Path>, format: &CsvFormat) -> Result<Panel> {
    load_panels(&[path.as_ref()], format)
}

/// Loads several CSV files and aligns all of their series on a common calendar.
pub fn load_panels<P: AsRef<Path>>(paths: &[P], format: &CsvFormat) -> Result<Panel> {
    let mut all: Vec<(String, RawSeries)> = Vec::new();
    for path in paths {
        for (name, series) in read_raw(path.as_ref(), &format.layout)? {
            if all.iter().any(|(n, _)| *n == name) {
                return Err(WaveError::param(
                    "input",
                    format!("series `{name}` appears in more than one input"),
                ));
            }
            all.push((name, series));
        }
    }
    if all.is_empty() {
        return Err(WaveError::InsufficientData("no value columns found".into()));
    }
    let panel = align(all, format.gaps)?;
    if panel.n_obs() < format.min_observations {
        return Err(WaveError::InsufficientData(format!(
            "{} aligned observations, at least {} required",
            panel.n_obs(),
            format.min_observations
        )));
    }
    Ok(panel)
}

fn read_raw(path: &Path, layout: &CsvLayout) -> Result<Vec<(String, RawSeries)>> {
    let file = std::fs::File::open(path).map_err(|source| WaveError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let parse_err = |line: u64, message: String| WaveError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(1, format!("missing column `{name}`")))
    };

    let mut out: Vec<(String, RawSeries)> = Vec::new();
    match layout {
        CsvLayout::Wide {
            date_column,
            value_columns,
        } => {
            let date_idx = column(date_column)?;
            let value_idx: Vec<usize> = match value_columns {
                Some(cols) => cols.iter().map(|c| column(c)).collect::<Result<_>>()?,
                None => (0..headers.len()).filter(|&i| i != date_idx).collect(),
            };
            for &i in &value_idx {
                out.push((headers[i].to_string(), RawSeries::new()));
            }
            for record in reader.records() {
                let record = record.map_err(|e| {
                    let line = e.position().map_or(0, |p| p.line());
                    parse_err(line, e.to_string())
                })?;
                let line = record.position().map_or(0, |p| p.line());
                let date = parse_date(record.get(date_idx).unwrap_or("")).map_err(|m| parse_err(line, m))?;
                for (slot, &i) in value_idx.iter().enumerate() {
                    let cell = record.get(i).unwrap_or("");
                    let value =
                        parse_value(cell).map_err(|m| parse_err(line, format!("column `{}`: {m}", &headers[i])))?;
                    if out[slot].1.insert(date, value).is_some() {
                        return Err(parse_err(line, format!("duplicate date {date}")));
                    }
                }
            }
        }
        CsvLayout::Long {
            date_column,
            name_column,
            value_column,
        } => {
            let (d, n, v) = (column(date_column)?, column(name_column)?, column(value_column)?);
            for record in reader.records() {
                let record = record.map_err(|e| {
                    let line = e.position().map_or(0, |p| p.line());
                    parse_err(line, e.to_string())
                })?;
                let line = record.position().map_or(0, |p| p.line());
                let date = parse_date(record.get(d).unwrap_or("")).map_err(|m| parse_err(line, m))?;
                let name = record.get(n).unwrap_or("").to_string();
                if name.is_empty() {
                    return Err(parse_err(line, "empty series name".into()));
                }
                let value = parse_value(record.get(v).unwrap_or("")).map_err(|m| parse_err(line, m))?;
                let slot = match out.iter().position(|(existing, _)| *existing == name) {
                    Some(s) => s,
                    None => {
                        out.push((name.clone(), RawSeries::new()));
                        out.len() - 1
                    }
                };
                if out[slot].1.insert(date, value).is_some() {
                    return Err(parse_err(line, format!("duplicate date {date} for `{name}`")));
                }
            }
        }
    }
    Ok(out)
}

fn parse_date(cell: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(cell, DATE_FORMAT)
        .map_err(|_| format!("cannot parse date `{cell}` (expected YYYY-MM-DD)"))
}

fn parse_value(cell: &str) -> std::result::Result<Option<f64>, String> {
    if cell.is_empty() {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        Ok(_) => Err(format!("non-finite value `{cell}`")),
        Err(_) => Err(format!("cannot parse value `{cell}`")),
    }
}

fn align(series: Vec<(String, RawSeries)>, gaps: GapPolicy) -> Result<Panel> {
    let names: Vec<String> = series.iter().map(|(n, _)| n.clone()).collect();
    let (dates, values) = match gaps {
        GapPolicy::Intersect => {
            let dates: Vec<NaiveDate> = series[0]
                .1
                .keys()
                .copied()
                .filter(|d| series.iter().all(|(_, s)| matches!(s.get(d), Some(Some(_)))))
                .collect();
            let values = series
                .iter()
                .map(|(_, s)| dates.iter().map(|d| s[d].expect("observed")).collect())
                .collect();
            (dates, values)
        }
        GapPolicy::ForwardFill => {
            let start = series
                .iter()
                .map(|(_, s)| s.iter().find(|(_, v)| v.is_some()).map(|(d, _)| *d))
                .collect::<Option<Vec<_>>>()
                .and_then(|firsts| firsts.into_iter().max());
            let Some(start) = start else {
                return Err(WaveError::InsufficientData("a series has no observations".into()));
            };
            let calendar: BTreeSet<NaiveDate> = series
                .iter()
                .flat_map(|(_, s)| s.keys().copied())
                .filter(|d| *d >= start)
                .collect();
            let dates: Vec<NaiveDate> = calendar.into_iter().collect();
            let values = series
                .iter()
                .map(|(_, s)| {
                    let mut last = s
                        .range(..=start)
                        .rev()
                        .find_map(|(_, v)| *v)
                        .expect("observed by start");
                    dates
                        .iter()
                        .map(|d| {
                            if let Some(Some(v)) = s.get(d) {
                                last = *v;
                            }
                            last
                        })
                        .collect()
                })
                .collect();
            (dates, values)
        }
    };
    Panel::new(names, dates, values)
}

/// First-order logarithmic differences `ln p_t - ln p_{t-1}` of a price panel.
pub fn log_returns(prices: &Panel) -> Result<Panel> {
    if prices.n_obs() < 2 {
        return Err(WaveError::InsufficientData(
            "at least two prices are needed for returns".into(),
        ));
    }
    let mut values = Vec::with_capacity(prices.n_series());
    for (name, row) in prices.names.iter().zip(&prices.values) {
        if let Some(pos) = row.iter().position(|&p| p <= 0.0) {
            return Err(WaveError::NonPositivePrice {
                series: name.clone(),
                date: prices.dates[pos].to_string(),
                value: row[pos],
            });
        }
        values.push(row.windows(2).map(|w| w[1].ln() - w[0].ln()).collect());
    }
    Panel::new(prices.names.clone(), prices.dates[1..].to_vec(), values)
}

/// Descriptive statistics of one series.
///
/// Skewness and kurtosis are moment ratios `m3 / m2^1.5` and `m4 / m2^2 - 3`
/// (excess, so a normal sample gives 0); they and the Jarque-Bera statistic
/// are `None` for a zero-variance series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsSummary {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub std_dev: f64,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub jarque_bera: Option<f64>,
}

pub fn summarize(name: &str, x: &[f64]) -> Result<StatsSummary> {
    let n = x.len();
    if n < 4 {
        return Err(WaveError::InsufficientData(format!(
            "series `{name}` has {n} observations, at least 4 required"
        )));
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let std_dev = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let scale = sorted[n - 1].abs().max(sorted[0].abs());
    let degenerate = m2 <= (f64::EPSILON * scale).powi(2);
    let (skewness, excess_kurtosis, jarque_bera) = if degenerate {
        (None, None, None)
    } else {
        let s = m3 / m2.powf(1.5);
        let k = m4 / (m2 * m2) - 3.0;
        (Some(s), Some(k), Some(nf / 6.0 * (s * s + k * k / 4.0)))
    };
    Ok(StatsSummary {
        name: name.to_string(),
        count: n,
        mean,
        median,
        min: sorted[0],
        max: sorted[n - 1],
        std_dev,
        skewness,
        excess_kurtosis,
        jarque_bera,
    })
}

pub fn descriptive_stats(panel: &Panel) -> Result<Vec<StatsSummary>> {
    panel
        .names
        .iter()
        .zip(&panel.values)
        .map(|(name, row)| summarize(name, row))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn lenient() -> CsvFormat {
        CsvFormat {
            min_observations: 1,
            ..CsvFormat::default()
        }
    }

    #[test]
    fn wide_two_column_csv() {
        let mut s = String::from("date,SPX\n");
        for d in 1..=10 {
            s += &format!("2020-01-{d:02},{}\n", 100.0 + d as f64);
        }
        let f = write_csv(&s);
        let p = load_panel(f.path(), &lenient()).unwrap();
        assert_eq!(p.n_series(), 1);
        assert_eq!(p.n_obs(), 10);
        assert_eq!(p.series(0)[9], 110.0);
    }

    #[test]
    fn two_files_align_on_intersection() {
        let mut a = String::from("date,A\n");
        let mut b = String::from("date,B\n");
        for d in 1..=10 {
            a += &format!("2020-01-{d:02},{d}\n");
        }
        for d in 3..=12 {
            b += &format!("2020-01-{d:02},{d}\n");
        }
        let (fa, fb) = (write_csv(&a), write_csv(&b));
        let p = load_panels(&[fa.path(), fb.path()], &lenient()).unwrap();
        assert_eq!(p.n_obs(), 8);
        assert_eq!(p.dates()[0], NaiveDate::from_ymd_opt(2020, 1, 3).unwrap());
        assert_eq!(p.series(0), p.series(1));
    }

    #[test]
    fn non_numeric_cell_names_line() {
        let f = write_csv("date,A\n2020-01-01,1.0\n2020-01-02,abc\n2020-01-03,2.0\n");
        let err = load_panel(f.path(), &lenient()).unwrap_err();
        match err {
            WaveError::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_few_observations_rejected() {
        let f = write_csv("date,A\n2020-01-01,1.0\n2020-01-02,2.0\n");
        assert!(matches!(
            load_panel(f.path(), &CsvFormat::default()),
            Err(WaveError::InsufficientData(_))
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_panel("/definitely/not/here.csv", &CsvFormat::default()).unwrap_err();
        assert_eq!(err.kind(), "io");
    }

    #[test]
    fn gaps_intersect_or_forward_fill() {
        let f = write_csv("date,A,B\n2020-01-01,1,10\n2020-01-02,,11\n2020-01-03,3,12\n");
        let p = load_panel(f.path(), &lenient()).unwrap();
        assert_eq!(p.n_obs(), 2);
        let ff = CsvFormat {
            gaps: GapPolicy::ForwardFill,
            ..lenient()
        };
        let p = load_panel(f.path(), &ff).unwrap();
        assert_eq!(p.series(0), &[1.0, 1.0, 3.0]);
        assert_eq!(p.series(1), &[10.0, 11.0, 12.0]);
    }

    #[test]
    fn long_layout() {
        let f = write_csv("date,name,value\n2020-01-02,A,2\n2020-01-01,A,1\n2020-01-01,B,5\n2020-01-02,B,6\n");
        let p = load_panel(
            f.path(),
            &CsvFormat {
                min_observations: 1,
                ..CsvFormat::long()
            },
        )
        .unwrap();
        assert_eq!(p.names(), &["A".to_string(), "B".to_string()]);
        assert_eq!(p.series(0), &[1.0, 2.0]);
    }

    #[test]
    fn log_returns_examples() {
        let e = std::f64::consts::E;
        let p = Panel::from_series(vec!["x".into()], vec![vec![1.0, e, e * e]]).unwrap();
        let r = log_returns(&p).unwrap();
        assert!((r.series(0)[0] - 1.0).abs() < 1e-15);
        assert!((r.series(0)[1] - 1.0).abs() < 1e-15);

        let p = Panel::from_series(vec!["x".into()], vec![vec![5.0, 5.0, 5.0]]).unwrap();
        assert_eq!(log_returns(&p).unwrap().series(0), &[0.0, 0.0]);

        let p = Panel::from_series(vec!["x".into()], vec![vec![100.0, 105.0]]).unwrap();
        let r = log_returns(&p).unwrap().series(0)[0];
        assert!((r - 0.048_790_164_169_432).abs() < 1e-12);
    }

    #[test]
    fn log_returns_rejects_non_positive() {
        let p = Panel::from_series(vec!["x".into()], vec![vec![1.0, 0.0, 2.0]]).unwrap();
        match log_returns(&p).unwrap_err() {
            WaveError::NonPositivePrice { series, date, .. } => {
                assert_eq!(series, "x");
                assert_eq!(date, "2000-01-02");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stats_of_alternating_series() {
        let x: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let s = summarize("alt", &x).unwrap();
        assert_eq!(s.mean, 0.0);
        assert!((s.std_dev - (10.0f64 / 9.0).sqrt()).abs() < 1e-15);
        assert_eq!(s.median, 0.0);
        assert!(s.skewness.unwrap().abs() < 1e-15);
        assert!((s.excess_kurtosis.unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_series_has_undefined_moments() {
        let s = summarize("c", &[0.3; 8]).unwrap();
        assert_eq!(s.std_dev, 0.0);
        assert_eq!(s.skewness, None);
        assert_eq!(s.excess_kurtosis, None);
        assert_eq!(s.jarque_bera, None);
    }

    #[test]
    fn stats_count_matches_length() {
        let x: Vec<f64> = (0..4096).map(|i| (i as f64 * 0.37).sin()).collect();
        assert_eq!(summarize("s", &x).unwrap().count, 4096);
    }

    #[test]
    fn too_short_for_stats() {
        assert!(summarize("s", &[1.0, 2.0, 3.0]).is_err());
    }
}
