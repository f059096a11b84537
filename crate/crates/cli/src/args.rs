use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "wavedep",
    version,
    about = "Wavelet dependence, coherence, contagion and long-memory analysis of return panels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Descriptive statistics of every series.
    Stats(Opts),
    /// MODWT coefficients of one series.
    Decompose(Opts),
    /// Wavelet correlation of a base series against every other series.
    Wcor(Opts),
    /// Lagged wavelet cross-correlation of a base series against the others.
    Wccor(Opts),
    /// Wavelet multiple correlation of the whole panel.
    Wmc(Opts),
    /// Wavelet multiple cross-correlation of the whole panel.
    Wmcc(Opts),
    /// Per-horizon leading series of the panel.
    Leaders(Opts),
    /// Morlet wavelet coherence of two series with Monte Carlo significance.
    Coherence(Opts),
    /// Rolling-window wavelet correlation of two series.
    RollingCor(Opts),
    /// Before/after event test on rolling wavelet correlations.
    ContagionTest(Opts),
    /// Logscale diagram and Hurst fit of one series.
    Logscale(Opts),
    /// Hurst exponent and scaling parameters of every series.
    Hurst(Opts),
    /// Hurst exponent over sliding windows.
    RollingHurst(Opts),
    /// Fractal connectivity matrix with hierarchical clustering.
    Connectivity(Opts),
    /// Synthetic fractional Gaussian noise.
    SynthFgn(Opts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Stats(_) => "stats",
            Command::Decompose(_) => "decompose",
            Command::Wcor(_) => "wcor",
            Command::Wccor(_) => "wccor",
            Command::Wmc(_) => "wmc",
            Command::Wmcc(_) => "wmcc",
            Command::Leaders(_) => "leaders",
            Command::Coherence(_) => "coherence",
            Command::RollingCor(_) => "rolling-cor",
            Command::ContagionTest(_) => "contagion-test",
            Command::Logscale(_) => "logscale",
            Command::Hurst(_) => "hurst",
            Command::RollingHurst(_) => "rolling-hurst",
            Command::Connectivity(_) => "connectivity",
            Command::SynthFgn(_) => "synth-fgn",
        }
    }

    pub fn opts(&self) -> &Opts {
        match self {
            Command::Stats(o)
            | Command::Decompose(o)
            | Command::Wcor(o)
            | Command::Wccor(o)
            | Command::Wmc(o)
            | Command::Wmcc(o)
            | Command::Leaders(o)
            | Command::Coherence(o)
            | Command::RollingCor(o)
            | Command::ContagionTest(o)
            | Command::Logscale(o)
            | Command::Hurst(o)
            | Command::RollingHurst(o)
            | Command::Connectivity(o)
            | Command::SynthFgn(o) => o,
        }
    }
}

/// Options shared by every subcommand. Each may also be given in the config
/// file under the same name (dashes or underscores); flags win.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Input CSV files (merged on common dates).
    #[arg(value_name = "FILE")]
    pub inputs: Vec<PathBuf>,

    /// Flat `key = value` file supplying defaults for any option.
    #[arg(long, help_heading = "Run")]
    pub config: Option<PathBuf>,
    /// Output directory (also WAVEDEP_OUT_DIR).
    #[arg(long, help_heading = "Run")]
    pub out_dir: Option<PathBuf>,
    /// Output file tag; defaults to a UTC timestamp.
    #[arg(long, help_heading = "Run")]
    pub tag: Option<String>,
    #[arg(long, help_heading = "Run")]
    pub seed: Option<u64>,

    /// CSV layout: wide (date + one column per series) or long (date,name,value).
    #[arg(long, help_heading = "Input")]
    pub format: Option<String>,
    /// Whether inputs hold prices (converted to log returns) or returns.
    #[arg(long, help_heading = "Input")]
    pub kind: Option<String>,
    /// Analyse absolute returns as a volatility proxy.
    #[arg(long, help_heading = "Input")]
    pub volatility: bool,
    /// Forward-fill gaps instead of dropping dates missing from any series.
    #[arg(long, help_heading = "Input")]
    pub fill: bool,
    /// Comma-separated series to keep, in order.
    #[arg(long, value_delimiter = ',', help_heading = "Input")]
    pub series: Vec<String>,
    /// Reference series for pairwise tables (default: first series).
    #[arg(long, help_heading = "Input")]
    pub base: Option<String>,
    /// Minimum number of aligned observations.
    #[arg(long, help_heading = "Input")]
    pub min_obs: Option<usize>,

    /// Wavelet filter: la8 or haar.
    #[arg(long, help_heading = "Wavelet")]
    pub filter: Option<String>,
    /// Decomposition depth.
    #[arg(long, help_heading = "Wavelet")]
    pub levels: Option<usize>,
    /// Boundary handling: periodic, brickwall or reflection.
    #[arg(long, help_heading = "Wavelet")]
    pub boundary: Option<String>,
    #[arg(long, help_heading = "Wavelet")]
    pub confidence: Option<f64>,
    /// Largest lag for cross-correlations.
    #[arg(long, help_heading = "Wavelet")]
    pub max_lag: Option<usize>,

    /// Rolling window length in observations.
    #[arg(long, help_heading = "Rolling")]
    pub window: Option<usize>,
    #[arg(long, help_heading = "Rolling")]
    pub step: Option<usize>,
    /// Event date (YYYY-MM-DD) splitting before and after samples.
    #[arg(long, help_heading = "Rolling")]
    pub event: Option<String>,
    /// Label printed next to the event in output tables.
    #[arg(long, help_heading = "Rolling")]
    pub event_label: Option<String>,
    /// Observations before the event used by the test.
    #[arg(long, help_heading = "Rolling")]
    pub pre: Option<usize>,
    /// Observations from the event on used by the test.
    #[arg(long, help_heading = "Rolling")]
    pub post: Option<usize>,

    /// Monte Carlo surrogate pairs for coherence significance.
    #[arg(long, help_heading = "Coherence")]
    pub surrogates: Option<usize>,
    /// Surrogate quantile used as the significance threshold.
    #[arg(long, help_heading = "Coherence")]
    pub quantile: Option<f64>,
    /// Threshold pooling: per-scale or per-cell.
    #[arg(long, help_heading = "Coherence")]
    pub pooling: Option<String>,
    /// Draw a phase arrow every this many displayed cells.
    #[arg(long, help_heading = "Coherence")]
    pub arrow_every: Option<usize>,

    /// First octave of the scaling range.
    #[arg(long, help_heading = "Long memory")]
    pub j1: Option<usize>,
    /// Last octave of the scaling range.
    #[arg(long, help_heading = "Long memory")]
    pub j2: Option<usize>,
    /// Largest per-level spread for a connectivity entry to count as converged.
    #[arg(long, help_heading = "Long memory")]
    pub tolerance: Option<f64>,
    /// Number of clusters to cut the dendrogram into.
    #[arg(long, help_heading = "Long memory")]
    pub clusters: Option<usize>,
    /// Cut the dendrogram at this distance instead of a cluster count.
    #[arg(long, help_heading = "Long memory")]
    pub height: Option<f64>,

    /// Hurst exponent of the synthetic series.
    #[arg(long = "H", help_heading = "Synthesis")]
    pub hurst: Option<f64>,
    /// Length of the synthetic series.
    #[arg(long = "n", help_heading = "Synthesis")]
    pub n: Option<usize>,
}
