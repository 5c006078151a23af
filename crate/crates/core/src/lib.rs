//! Thermodynamic formalism on subshifts of finite type and a few interval
//! maps: pressure, multifractal spectra of Birkhoff averages, level-set
//! pressure by exact counting, Moran constructions and their checks.

pub mod config;
pub mod error;
pub mod moran;
pub mod numerics;
pub mod smooth;
pub mod symbolic;
pub mod thermo;

pub use error::{Error, Result};
