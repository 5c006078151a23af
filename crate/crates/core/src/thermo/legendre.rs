//! The Legendre route to the constrained supremum:
//! `F(α) = inf_q [P(qφ + ψ) − qα]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbolic::{Potential, ShiftSpace};
use crate::thermo::{
    cycle_mean, edge_weights, perron, rotation_interval, PerronSolution, RotationInterval, DEFAULT_POWER_TOL,
};

/// `q` is searched in `[-Q_CAP, Q_CAP]`; beyond that `α` is treated as an endpoint.
pub const Q_CAP: f64 = 1_048_576.0;

// α closer than this to an end of the rotation interval counts as that end
const ENDPOINT_TOL: f64 = 1e-12;

/// One grid point of a spectrum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub alpha: f64,
    /// `None` when `α` is infeasible.
    pub value: Option<f64>,
    /// Minimizing `q`; absent at endpoints and for non-Legendre spectra.
    pub q: Option<f64>,
    pub feasible: bool,
    pub endpoint: bool,
}

impl SpectrumPoint {
    pub fn infeasible(alpha: f64) -> Self {
        SpectrumPoint {
            alpha,
            value: None,
            q: None,
            feasible: false,
            endpoint: false,
        }
    }
}

/// `α ↦ F(α)` on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumCurve {
    pub points: Vec<SpectrumPoint>,
    /// How the values were obtained.
    pub method: String,
    /// Upper bound every value must respect: `P(ψ)` or its estimate.
    pub pressure_bound: Option<f64>,
}

impl SpectrumCurve {
    pub fn alphas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.alpha).collect()
    }

    pub fn values(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Largest second difference over consecutive feasible points, scaled for
    /// uneven spacing: `λ F(a) + (1−λ) F(c) − F(b)` for `a < b < c`.
    /// Concavity means this is at most a small slack.
    pub fn max_second_difference(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter_map(|p| p.value.map(|v| (p.alpha, v)))
            .collect();
        pts.windows(3)
            .map(|t| {
                let (a, fa) = t[0];
                let (b, fb) = t[1];
                let (c, fc) = t[2];
                let lambda = (c - b) / (c - a);
                lambda * fa + (1.0 - lambda) * fc - fb
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_concave(&self, slack: f64) -> bool {
        self.max_second_difference() <= slack
    }

    pub fn respects_bound(&self, slack: f64) -> bool {
        match self.pressure_bound {
            Some(b) => self.points.iter().filter_map(|p| p.value).all(|v| v <= b + slack),
            None => true,
        }
    }
}

/// Precomputed data for Legendre solves with fixed `φ` and `ψ`.
pub struct Legendre {
    size: usize,
    phi: Vec<f64>,
    psi: Vec<f64>,
    interval: RotationInterval,
    pressure_psi: f64,
    psi_min_cycle: f64,
    psi_max_cycle: f64,
}

impl Legendre {
    pub fn new(space: &ShiftSpace, phi: &Potential, psi: &Potential) -> Result<Self> {
        for p in [phi, psi] {
            if p.space() != space {
                return Err(Error::InvalidPotential("potential lives on a different shift".into()));
            }
        }
        let k = space.alphabet_size();
        let phi_w = edge_weights(phi)?;
        let psi_w = edge_weights(psi)?;
        let interval = rotation_interval(space, phi)?;
        let pressure_psi = perron(k, &psi_w, DEFAULT_POWER_TOL)?.log_radius;
        Ok(Legendre {
            size: k,
            psi_min_cycle: cycle_mean(k, &psi_w, interval.min_cycle.symbols()),
            psi_max_cycle: cycle_mean(k, &psi_w, interval.max_cycle.symbols()),
            phi: phi_w,
            psi: psi_w,
            interval,
            pressure_psi,
        })
    }

    pub fn interval(&self) -> &RotationInterval {
        &self.interval
    }

    /// `P(ψ)`.
    pub fn pressure_psi(&self) -> f64 {
        self.pressure_psi
    }

    /// Perron data of `qφ + ψ`.
    pub fn solve_q(&self, q: f64) -> Result<PerronSolution> {
        let w: Vec<f64> = self
            .phi
            .iter()
            .zip(&self.psi)
            .map(|(&a, &b)| if a.is_finite() { q * a + b } else { f64::NEG_INFINITY })
            .collect();
        perron(self.size, &w, DEFAULT_POWER_TOL)
    }

    /// `P(qφ + ψ)` and its derivative `∫φ dμ_q`.
    pub fn pressure_and_slope(&self, q: f64) -> Result<(f64, f64)> {
        let sol = self.solve_q(q)?;
        Ok((sol.log_radius, sol.edge_integral(&self.phi)))
    }

    /// `F(α)`, with the minimizing `q` when the infimum is attained.
    pub fn point(&self, alpha: f64) -> Result<SpectrumPoint> {
        let r = &self.interval;
        let scale = 1.0 + r.min.abs().max(r.max.abs());
        let tol = ENDPOINT_TOL * scale;
        if !alpha.is_finite() || !r.contains(alpha, tol) {
            return Ok(SpectrumPoint::infeasible(alpha));
        }
        if r.is_degenerate(tol) {
            // every invariant measure has ∫φ = α, so the constraint is void
            return Ok(SpectrumPoint {
                alpha,
                value: Some(self.pressure_psi),
                q: Some(0.0),
                feasible: true,
                endpoint: true,
            });
        }
        let endpoint = |v: f64| SpectrumPoint {
            alpha,
            value: Some(v),
            q: None,
            feasible: true,
            endpoint: true,
        };
        if (alpha - r.max).abs() <= tol {
            return Ok(endpoint(self.psi_max_cycle));
        }
        if (alpha - r.min).abs() <= tol {
            return Ok(endpoint(self.psi_min_cycle));
        }

        let slope = |q: f64| self.pressure_and_slope(q).map(|x| x.1);
        let mut q_max = 1.0;
        loop {
            if slope(-q_max)? <= alpha && slope(q_max)? >= alpha {
                break;
            }
            if q_max >= Q_CAP {
                // the derivative never reaches α: take the closer endpoint
                let near_max = (r.max - alpha) < (alpha - r.min);
                return Ok(endpoint(if near_max {
                    self.psi_max_cycle
                } else {
                    self.psi_min_cycle
                }));
            }
            q_max *= 2.0;
        }
        let (mut lo, mut hi) = (-q_max, q_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid)? < alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // F is flat to second order near the minimizer, so either end will do;
        // take whichever gives the smaller objective
        let objective = |q: f64| -> Result<f64> { Ok(self.pressure_and_slope(q)?.0 - q * alpha) };
        let (f_lo, f_hi) = (objective(lo)?, objective(hi)?);
        let (q, value) = if f_lo <= f_hi { (lo, f_lo) } else { (hi, f_hi) };
        Ok(SpectrumPoint {
            alpha,
            value: Some(value),
            q: Some(q),
            feasible: true,
            endpoint: false,
        })
    }
}

/// `F(α) = sup{h_ν + ∫ψ dν : ∫φ dν = α}` on a grid, via the Legendre
/// transform of `q ↦ P(qφ + ψ)`.
pub fn legendre_spectrum(
    space: &ShiftSpace,
    phi: &Potential,
    psi: &Potential,
    alphas: &[f64],
) -> Result<SpectrumCurve> {
    let solver = Legendre::new(space, phi, psi)?;
    let points = alphas
        .par_iter()
        .map(|&a| solver.point(a))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumCurve {
        points,
        method: "legendre".into(),
        pressure_bound: Some(solver.pressure_psi()),
    })
}
