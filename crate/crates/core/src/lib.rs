//! Wavelet toolkit for multi-horizon dependence, contagion testing and
//! long-memory estimation over panels of financial return series.
//!
//! The pipeline is organised by module:
//!
//! - [`series_io`]: CSV ingestion, date alignment, log returns and descriptive statistics.
//! - [`modwt`]: LA(8)/Haar filters and the maximal-overlap discrete wavelet transform.
//! - [`dependence`]: wavelet variance, correlation, cross-correlation and
//!   multiple (cross-)correlation with per-scale leaders.
//! - [`cwt`]: Morlet continuous wavelet transform, smoothed coherence, phase,
//!   cone of influence and red-noise Monte Carlo significance.
//! - [`contagion`]: rolling wavelet correlation and the before/after event t-test.
//! - [`longmemory`]: fGn synthesis, logscale diagram, weighted Hurst fit,
//!   rolling Hurst, fractal connectivity and hierarchical clustering.
//! - [`report`]: CSV/JSON/SVG renderings of the result types.

pub mod contagion;
pub mod cwt;
pub mod dependence;
pub mod error;
pub mod longmemory;
pub mod modwt;
pub mod report;
pub mod series_io;
pub mod stats;

pub use error::{Result, WaveError};
