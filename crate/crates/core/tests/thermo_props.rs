use multifrac::symbolic::{Potential, ShiftSpace};
use multifrac::thermo::{
    bs_dimension, constrained_variational, counting_pressure, direct_level_pressure, legendre_spectrum,
    rotation_interval, transfer_pressure, BsTarget, DeltaSchedule, Legendre, NRange, DEFAULT_GRID_RESOLUTION,
};
use proptest::prelude::*;

fn shift(golden: bool) -> ShiftSpace {
    if golden {
        ShiftSpace::golden_mean()
    } else {
        ShiftSpace::full(2).unwrap()
    }
}

/// Memory-1 or memory-2 potential on a 2-symbol shift from a table of four
/// values.
fn potential(space: &ShiftSpace, memory: usize, values: &[f64]) -> Potential {
    Potential::from_fn(space, memory, |w| match memory {
        1 => values[w[0] as usize],
        _ => values[2 * w[0] as usize + w[1] as usize],
    })
    .unwrap()
}

fn table() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectrum_is_concave_and_below_pressure(
        golden in any::<bool>(),
        memory in 1usize..=2,
        phi_v in table(),
        psi_v in table(),
    ) {
        let space = shift(golden);
        let phi = potential(&space, memory, &phi_v);
        let psi = potential(&space, memory, &psi_v);
        let r = rotation_interval(&space, &phi).unwrap();
        prop_assume!(r.max - r.min > 1e-3);
        let alphas: Vec<f64> = (1..20).map(|i| r.min + (r.max - r.min) * i as f64 / 20.0).collect();
        let curve = legendre_spectrum(&space, &phi, &psi, &alphas).unwrap();
        prop_assert!(curve.max_second_difference() <= 1e-8, "{}", curve.max_second_difference());
        let p = transfer_pressure(&space, &psi).unwrap();
        for pt in &curve.points {
            prop_assert!(pt.value.unwrap() <= p + 1e-9);
        }
    }

    #[test]
    fn spectrum_touches_pressure_at_the_equilibrium_average(
        golden in any::<bool>(),
        phi_v in table(),
        psi_v in table(),
    ) {
        let space = shift(golden);
        let phi = potential(&space, 2, &phi_v);
        let psi = potential(&space, 2, &psi_v);
        let solver = Legendre::new(&space, &phi, &psi).unwrap();
        let eq = solver.solve_q(0.0).unwrap().equilibrium(&space).unwrap();
        let alpha_star = eq.integral(&phi).unwrap();
        let r = solver.interval();
        prop_assume!(alpha_star > r.min + 1e-6 && alpha_star < r.max - 1e-6);
        let f = solver.point(alpha_star).unwrap().value.unwrap();
        prop_assert!((f - solver.pressure_psi()).abs() < 1e-9, "{f} vs {}", solver.pressure_psi());
    }

    #[test]
    fn doubling_psi_halves_the_dimension(golden in any::<bool>(), psi_v in proptest::collection::vec(0.1f64..2.0, 4)) {
        let space = shift(golden);
        let psi = potential(&space, 2, &psi_v);
        let one = bs_dimension(&space, &BsTarget::WholeSpace, &psi).unwrap().dimension;
        let two = bs_dimension(&space, &BsTarget::WholeSpace, &psi.scaled(2.0)).unwrap().dimension;
        prop_assert!((two - one / 2.0).abs() < 1e-8, "{one} {two}");
    }

    #[test]
    fn wider_tolerance_never_shrinks_partition_sums(
        golden in any::<bool>(),
        phi_v in table(),
        psi_v in table(),
        alpha in 0.0f64..1.0,
        d1 in 0.01f64..0.3,
        extra in 0.0f64..0.3,
    ) {
        let space = shift(golden);
        let phi = potential(&space, 1, &phi_v);
        let psi = potential(&space, 2, &psi_v);
        let r = rotation_interval(&space, &phi).unwrap();
        let target = r.min + alpha * (r.max - r.min);
        let n = NRange::new(4, 12).unwrap();
        let narrow = direct_level_pressure(&space, &phi, &psi, target, &DeltaSchedule::fixed(d1).unwrap(), n);
        let wide = direct_level_pressure(&space, &phi, &psi, target, &DeltaSchedule::fixed(d1 + extra).unwrap(), n);
        if let Ok(narrow) = narrow {
            let wide = wide.unwrap();
            for (a, b) in narrow.sums.iter().zip(&wide.sums) {
                prop_assert!(b.words >= a.words);
                if let Some(x) = a.log_sum {
                    prop_assert!(b.log_sum.unwrap() >= x - 1e-12);
                }
            }
        }
    }

    #[test]
    fn equilibrium_states_are_stochastic_and_stationary(golden in any::<bool>(), psi_v in table()) {
        let space = shift(golden);
        let psi = potential(&space, 2, &psi_v);
        let zero = Potential::constant(&space, 0.0);
        let m = Legendre::new(&space, &zero, &psi).unwrap().solve_q(0.0).unwrap().equilibrium(&space).unwrap();
        let (p, pi) = (m.matrix(), m.stationary());
        for (i, row) in p.iter().enumerate() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (j, &x) in row.iter().enumerate() {
                prop_assert!(x >= 0.0);
                if !space.allows(i as u8, j as u8) {
                    prop_assert_eq!(x, 0.0);
                }
            }
            let back: f64 = (0..pi.len()).map(|l| pi[l] * p[l][i]).sum();
            prop_assert!((back - pi[i]).abs() < 1e-10);
        }
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    // each case enumerates about 2^21 words
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn counting_matches_transfer_pressure(golden in any::<bool>(), memory in 1usize..=2, v in table()) {
        let space = shift(golden);
        let pot = potential(&space, memory, &v);
        let c = counting_pressure(&space, &pot, NRange::new(8, 20).unwrap()).unwrap();
        let t = transfer_pressure(&space, &pot).unwrap();
        prop_assert!((c.value - t).abs() <= 1e-3, "{} vs {t}", c.value);
    }
}

#[test]
fn legendre_and_constrained_search_agree_inside_the_interval() {
    for golden in [false, true] {
        let space = shift(golden);
        let phi = Potential::indicator(&space, 1);
        let zero = Potential::constant(&space, 0.0);
        let r = rotation_interval(&space, &phi).unwrap();
        let alphas: Vec<f64> = (1..10).map(|i| r.min + (r.max - r.min) * i as f64 / 10.0).collect();
        let curve = legendre_spectrum(&space, &phi, &zero, &alphas).unwrap();
        for p in &curve.points {
            let v = constrained_variational(&space, &phi, &zero, p.alpha, DEFAULT_GRID_RESOLUTION).unwrap();
            let f = p.value.unwrap();
            assert!(
                (v.value - f).abs() <= 1e-3,
                "golden={golden} alpha={}: {} vs {f}",
                p.alpha,
                v.value
            );
        }
    }
}

#[test]
fn golden_mean_one_third_is_two_thirds_log_two() {
    // the optimal measure is the Markov chain leaving 0 with probability 1/2,
    // whose entropy is (2/3) log 2
    let gm = ShiftSpace::golden_mean();
    let phi = Potential::indicator(&gm, 1);
    let zero = Potential::constant(&gm, 0.0);
    let expected = 2.0 / 3.0 * 2f64.ln();
    let f = Legendre::new(&gm, &phi, &zero)
        .unwrap()
        .point(1.0 / 3.0)
        .unwrap()
        .value
        .unwrap();
    assert!((f - expected).abs() < 1e-9, "{f}");
}
