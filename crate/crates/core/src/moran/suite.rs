//! Builds a construction from a config and runs every check on it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moran::{
    build_family, build_scheme, family_growth, max_ball_n, moran_measure, sample_balls, verify_level_convergence,
    verify_pdp, verify_separation_nesting, BuildMode, ConvergenceReport, FamilyGrowth, LevelStats, MeasureSummary,
    MoranConfig, PdpReport, SeparatedFamily, SeparationReport,
};
use crate::symbolic::{Potential, ShiftSpace};
use crate::thermo::Legendre;

/// Sampling sizes and the PDP exponent offset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuiteOptions {
    /// `None` builds eagerly when the leaves fit the budget, lazily otherwise.
    pub mode: Option<BuildMode>,
    /// Leaves traced by the convergence check (and sampled in lazy separation checks).
    pub samples: usize,
    /// Balls fed to the PDP fit.
    pub balls: usize,
    /// The PDP runs at `s = C − slack_factor · γ`.
    pub slack_factor: f64,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            mode: None,
            samples: 1000,
            balls: 1000,
            slack_factor: 5.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MoranReport {
    pub config: MoranConfig,
    pub options: SuiteOptions,
    /// Mode the scheme was actually built in.
    pub mode: BuildMode,
    /// `C = h_μ + ∫ψ dμ` for the optimal measure at `α`.
    pub c: f64,
    pub s: f64,
    pub families: Vec<SeparatedFamily>,
    pub levels: Vec<LevelStats>,
    pub growth: Vec<FamilyGrowth>,
    pub separation: SeparationReport,
    pub convergence: ConvergenceReport,
    pub measure: MeasureSummary,
    pub pdp: PdpReport,
    pub pass: bool,
}

/// Runs growth, separation and nesting, convergence and PDP checks on the
/// construction described by `config`. `C` is the conditional pressure at
/// `α` from the Legendre solver.
pub fn run_moran_suite(
    space: &ShiftSpace,
    phi: &Potential,
    psi: &Potential,
    config: &MoranConfig,
    options: &SuiteOptions,
) -> Result<MoranReport> {
    config.validate()?;
    let legendre = Legendre::new(space, phi, psi)?;
    let Some(c) = legendre.point(config.alpha)?.value else {
        let r = legendre.interval();
        return Err(Error::Infeasible {
            alpha: config.alpha,
            min: r.min,
            max: r.max,
        });
    };
    let s = c - options.slack_factor * config.gamma;
    let families = (1..=config.k_max())
        .map(|k| build_family(space, phi, psi, k, config))
        .collect::<Result<Vec<_>>>()?;
    let scheme = match options.mode {
        Some(mode) => build_scheme(space, families, config, mode)?,
        None => match build_scheme(space, families.clone(), config, BuildMode::Eager) {
            Err(Error::BudgetExceeded { .. }) => build_scheme(space, families, config, BuildMode::Lazy)?,
            other => other?,
        },
    };
    let growth = family_growth(space, phi, psi, config, c)?;

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let separation = verify_separation_nesting(&scheme, config.eps, options.samples, &mut rng);
    let convergence = verify_level_convergence(&scheme, phi, config, options.samples, &mut rng)?;
    let measure = moran_measure(&scheme, psi, config.k_max())?;
    let n_max = max_ball_n(&measure, config.eps);
    if n_max == 0 {
        return Err(Error::InvalidArgument("leaves are too short for any Bowen ball".into()));
    }
    let balls = sample_balls(&measure, 1, n_max, options.balls, &mut rng);
    let pdp = verify_pdp(&measure, s, psi, config.eps, &balls)?;

    let pass = growth.iter().all(|g| g.pass) && separation.pass && convergence.pass && pdp.pass;
    Ok(MoranReport {
        config: config.clone(),
        options: *options,
        mode: scheme.mode(),
        c,
        s,
        families: (1..=scheme.k_max()).map(|k| scheme.family(k).clone()).collect(),
        levels: scheme.stats().to_vec(),
        growth,
        separation,
        convergence,
        measure: measure.summary(),
        pdp,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_full_shift_suite_passes() {
        let full = ShiftSpace::full(2).unwrap();
        let phi = Potential::indicator(&full, 1);
        let zero = Potential::constant(&full, 0.0);
        let cfg = MoranConfig::new(0.5, 0.1, 0.5, vec![6, 8], vec![1, 2]).unwrap();
        let opts = SuiteOptions {
            mode: Some(BuildMode::Lazy),
            samples: 100,
            balls: 200,
            ..SuiteOptions::default()
        };
        let r = run_moran_suite(&full, &phi, &zero, &cfg, &opts).unwrap();
        assert!((r.c - 2f64.ln()).abs() < 1e-9);
        assert!(r.separation.pass && r.pdp.pass, "{:?} {:?}", r.separation, r.pdp);
        let again = run_moran_suite(&full, &phi, &zero, &cfg, &opts).unwrap();
        assert_eq!(r.pdp, again.pdp);
    }

    #[test]
    fn tiny_delta_is_not_witnessed() {
        let full = ShiftSpace::full(2).unwrap();
        let phi = Potential::indicator(&full, 1);
        let zero = Potential::constant(&full, 0.0);
        let mut cfg = MoranConfig::new(0.3, 0.1, 0.5, vec![8], vec![1]).unwrap();
        cfg.deltas = vec![1e-9];
        let e = run_moran_suite(&full, &phi, &zero, &cfg, &SuiteOptions::default()).unwrap_err();
        assert!(e.to_string().contains("level set not witnessed"), "{e}");
        assert!(e.is_infeasibility());
    }

    #[test]
    fn infeasible_alpha() {
        let gm = ShiftSpace::golden_mean();
        let phi = Potential::indicator(&gm, 1);
        let zero = Potential::constant(&gm, 0.0);
        let cfg = MoranConfig::new(0.7, 0.1, 0.5, vec![8], vec![1]).unwrap();
        let e = run_moran_suite(&gm, &phi, &zero, &cfg, &SuiteOptions::default()).unwrap_err();
        assert!(matches!(e, Error::Infeasible { .. }));
    }
}
