//! Moran constructions on shifts of finite type: separated families glued
//! with specification bridges into nested leaf sets, the weighted measures
//! on them, and checks of the estimates that drive the lower bound.

mod config;
mod family;
mod measure;
mod scheme;
mod suite;
mod verify;

pub use config::{Component, MoranConfig, DEFAULT_LEAF_BUDGET};
pub use family::{build_family, SeparatedFamily};
pub use measure::{moran_measure, MeasureSummary, MoranMeasure};
pub(crate) use scheme::glue_with_gap;
pub use scheme::{build_scheme, glue, BuildMode, LeafIndex, LevelStats, MoranScheme, Slot};
pub use suite::{run_moran_suite, MoranReport, SuiteOptions};
pub use verify::{
    ball_depth, family_growth, max_ball_n, sample_balls, verify_level_convergence, verify_pdp,
    verify_separation_nesting, Ball, ConvergenceReport, FamilyGrowth, LevelDeviation, PdpReport, SeparationReport,
};
