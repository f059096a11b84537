//! Morlet continuous wavelet transform, squared wavelet coherence, phase
//! reading and red-noise significance testing.

mod coherence;
mod significance;
mod transform;

pub use coherence::{
    phase_classify, wavelet_coherence, CoherenceField, PhaseClass, PhaseReading, Smoothing, Thresholds,
};
pub use significance::{ar1_fit, significance_montecarlo, Ar1Params, Pooling, SignificanceOptions};
pub use transform::{cone_of_influence, cwt_morlet, CwtEngine, CwtField, MorletParams};
