//! Smooth models: the Manneville–Pomeau map, expanding torus maps and the
//! Viana skew product, with orbit ensembles, specification-gap searches and
//! a coding-based level spectrum.

mod coding;
mod ensemble;
mod gap;
mod interval;
mod maps;

pub use coding::{mp_level_spectrum, CODING_METHOD, MAX_CODING_DEPTH};
pub use ensemble::{
    empirical_spectrum, orbit_ensemble, viana_invariance, EmpiricalSpectrum, EnsembleConfig, Escape, HistogramBin,
    InvarianceReport, OrbitEnsemble, SmoothMap, DEFAULT_TRANSIENT, MIN_ENSEMBLE,
};
pub use gap::{
    gap_sweep, spec_gap_estimate, GapAttempt, GapReport, GapSweep, Segment, SweepEntry, Witness, VERIFY_TOL,
};
pub use interval::{Interval, IntervalSet};
pub use maps::{
    CircleMap, FullBranchMap, MPMap, Observable, TorusExpandingMap, VianaMap, DEFAULT_VIANA_A, DEFAULT_VIANA_ALPHA,
};
