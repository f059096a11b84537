//! Long-range dependence: fractional Gaussian noise synthesis, logscale
//! diagrams with weighted Hurst fits, rolling Hurst exponents and the
//! fractal connectivity matrix with hierarchical clustering.

mod connectivity;
mod fgn;
mod logscale;

pub use connectivity::{cluster_markets, fractal_connectivity, Clustering, ConnectivityResult, Cut, Merge};
pub use fgn::{fgn_autocovariance, synth_fgn};
pub use logscale::{
    default_octaves, estimate_hurst, hurst_wls, logscale_diagram, max_octave, octave_coefficients, rolling_hurst,
    scaling_parameters, HurstFit, LogscaleDiagram, RollingHurstPoint, ScalingParams,
};
