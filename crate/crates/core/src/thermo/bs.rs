//! Dimension as the root of a pressure equation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbolic::{Potential, ShiftSpace};
use crate::thermo::{transfer_pressure, Legendre};

const ROOT_TOL: f64 = 1e-14;

/// Which set the dimension is taken of.
#[derive(Clone, Debug)]
pub enum BsTarget<'a> {
    WholeSpace,
    /// Points whose `φ`-averages converge to `α`.
    Level {
        phi: &'a Potential,
        alpha: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BsResult {
    pub dimension: f64,
    /// Pressure of `−sψ` on the target at the returned root.
    pub residual: f64,
    pub iterations: usize,
}

/// Root `s` of `P(Z, −sψ) = 0` for a strictly positive `ψ`.
///
/// On the whole space this uses the transfer-operator pressure; on a level
/// set it uses `sup{h_ν − s∫ψ dν : ∫φ dν = α}` from the Legendre solver.
pub fn bs_dimension(space: &ShiftSpace, target: &BsTarget, psi: &Potential) -> Result<BsResult> {
    if psi.min() <= 0.0 {
        return Err(Error::InvalidPotential(format!(
            "psi must be strictly positive, min is {}",
            psi.min()
        )));
    }
    let pressure = |s: f64| -> Result<f64> {
        let scaled = psi.scaled(-s);
        match target {
            BsTarget::WholeSpace => transfer_pressure(space, &scaled),
            BsTarget::Level { phi, alpha } => {
                let point = Legendre::new(space, phi, &scaled)?.point(*alpha)?;
                let interval = Legendre::new(space, phi, &scaled)?.interval().clone();
                point.value.ok_or(Error::Infeasible {
                    alpha: *alpha,
                    min: interval.min,
                    max: interval.max,
                })
            }
        }
    };
    let p0 = pressure(0.0)?;
    if p0 <= 0.0 {
        return Ok(BsResult {
            dimension: 0.0,
            residual: p0,
            iterations: 0,
        });
    }
    // P(−sψ) ≤ P(0) − s·min ψ, so the root lies below P(0)/min ψ
    let (mut lo, mut hi) = (0.0, p0 / psi.min());
    let mut iterations = 0;
    while hi - lo > ROOT_TOL * hi.max(1.0) && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if pressure(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let dimension = 0.5 * (lo + hi);
    Ok(BsResult {
        dimension,
        residual: pressure(dimension)?,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::binary_entropy;

    #[test]
    fn examples() {
        let full = ShiftSpace::full(2).unwrap();
        let half = Potential::constant(&full, 0.5);
        let d = bs_dimension(&full, &BsTarget::WholeSpace, &half).unwrap();
        assert!((d.dimension - 2f64.ln() / 0.5).abs() < 1e-12);
        assert!(d.residual.abs() < 1e-8);

        let one = Potential::constant(&full, 1.0);
        let phi = Potential::indicator(&full, 1);
        let d = bs_dimension(&full, &BsTarget::Level { phi: &phi, alpha: 0.3 }, &one).unwrap();
        assert!((d.dimension - binary_entropy(0.3)).abs() < 1e-9);

        let gm = ShiftSpace::golden_mean();
        let d = bs_dimension(&gm, &BsTarget::WholeSpace, &Potential::constant(&gm, 1.0)).unwrap();
        assert!((d.dimension - (0.5 * (1.0 + 5f64.sqrt())).ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_and_infeasible() {
        let full = ShiftSpace::full(2).unwrap();
        assert!(bs_dimension(&full, &BsTarget::WholeSpace, &Potential::constant(&full, 0.0)).is_err());
        let phi = Potential::indicator(&full, 1);
        let one = Potential::constant(&full, 1.0);
        let e = bs_dimension(&full, &BsTarget::Level { phi: &phi, alpha: 1.5 }, &one);
        assert!(matches!(e, Err(Error::Infeasible { .. })));
    }
}
