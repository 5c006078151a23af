//! Exact symbolic dynamics on one-sided subshifts of finite type.
//!
//! Points are one-sided sequences over `{0, .., k-1}`. Finite words stand for
//! cylinders or, where a point is needed, for their periodic extension.

mod enumerate;
mod metric;
mod potential;
mod shift;
mod word;

pub use enumerate::Words;
pub use metric::ShiftMetric;
pub use potential::Potential;
pub use shift::{ShiftSpace, MAX_ALPHABET};
pub use word::Word;
