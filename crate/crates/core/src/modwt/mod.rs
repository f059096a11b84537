//! Maximal-overlap discrete wavelet transform and multiresolution analysis.

mod filters;
mod transform;

pub use filters::{build_filter, filter, FilterKind, FilterPair};
pub use transform::{
    equivalent_width, max_level, modwt_panel, modwt_transform, mra_reconstruct, nonboundary_counts, BoundaryMode,
    Decomposition, Mra,
};
