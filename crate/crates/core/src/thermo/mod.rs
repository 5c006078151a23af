//! Pressure, spectra and the constrained variational problem on shifts.

mod bs;
mod counting;
mod legendre;
mod markov;
mod rotation;
mod transfer;
mod variational;

pub use bs::{bs_dimension, BsResult, BsTarget};
pub(crate) use counting::fold_words;
pub use counting::{
    counting_pressure, direct_level_pressure, direct_level_pressures, DeltaSchedule, LevelSum, NRange,
    PressureEstimate, DEFAULT_MAX_N,
};
pub use legendre::{legendre_spectrum, Legendre, SpectrumCurve, SpectrumPoint, Q_CAP};
pub use markov::MarkovMeasure;
pub use rotation::{cycle_mean, max_mean_cycle, rotation_interval, RotationInterval};
pub use transfer::{edge_weights, perron, transfer_pressure, PerronSolution, DEFAULT_POWER_TOL, MAX_POWER_ITERATIONS};
pub use variational::{constrained_variational, VariationalResult, DEFAULT_GRID_RESOLUTION};
