use multifrac::smooth::{
    empirical_spectrum, mp_level_spectrum, spec_gap_estimate, CircleMap, EnsembleConfig, FullBranchMap, MPMap,
    Observable, Segment, SmoothMap, VianaMap,
};
use multifrac::symbolic::{Potential, ShiftSpace};
use multifrac::thermo::{direct_level_pressure, DeltaSchedule, NRange};
use proptest::prelude::*;

fn iterate<M: FullBranchMap + ?Sized>(map: &M, x: f64, n: usize) -> f64 {
    (0..n).fold(x, |y, _| map.apply(y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn inverse_branches_round_trip(alpha in 0.05f64..0.95, y in 0.0f64..=1.0) {
        let mp = MPMap::new(alpha).unwrap();
        let [left, right] = mp.inverse_branches(y).unwrap();
        prop_assert!((0.0..=0.5).contains(&left));
        prop_assert!((mp.apply(left) - y).abs() <= 1e-12);
        // 1/2 belongs to the left branch, so y = 0 has no right preimage
        if y > 0.0 {
            prop_assert!(right > 0.5);
            prop_assert!((mp.apply(right) - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn viana_base_is_exactly_d_to_one(j in 0u32..256, i in 0u32..16, x in -1.0f64..1.0) {
        let v = VianaMap::new(16, 2.0, 0.01).unwrap();
        let theta = j as f64 / 256.0;
        let shifted = (theta + i as f64 / 16.0).fract();
        let (a, _) = v.apply(theta, x).unwrap();
        let (b, _) = v.apply(shifted, x).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn concatenating_segments_need_no_gap(
        mp_map in any::<bool>(),
        x in 0.0f64..1.0,
        n1 in 1usize..10,
        n2 in 1usize..8,
    ) {
        let mp = MPMap::new(0.5).unwrap();
        let doubling = CircleMap::doubling();
        let map: &dyn FullBranchMap = if mp_map { &mp } else { &doubling };
        let y = iterate(map, x, n1);
        let segments = [Segment { start: x, len: n1 }, Segment { start: y, len: n2 }];
        let r = spec_gap_estimate(map, &segments, 0.05, 4).unwrap();
        prop_assert_eq!(r.gap, Some(0), "{:?}", r.failure);
        prop_assert!(r.witness.unwrap().verified);
    }
}

#[test]
fn mp_boundary_values() {
    let mp = MPMap::new(0.5).unwrap();
    assert_eq!(mp.apply(0.0), 0.0);
    assert!((mp.apply(0.5) - 1.0).abs() < 1e-15);
    assert!((mp.apply(0.25) - 0.426776695296637).abs() < 1e-12);
    assert!(mp.try_apply(1.5).is_err());
}

#[test]
fn histograms_are_stable_under_reseeding() {
    let map = SmoothMap::Mp(MPMap::new(0.5).unwrap());
    let obs = Observable::Indicator { lo: 0.5, hi: 1.0 };
    let a = empirical_spectrum(&map, &obs, &EnsembleConfig::new(100_000, 20, 21, 1)).unwrap();
    let b = empirical_spectrum(&map, &obs, &EnsembleConfig::new(100_000, 20, 21, 2)).unwrap();
    let tv = a.total_variation(&b).unwrap();
    assert!(tv <= 0.05, "total variation {tv}");
    let again = empirical_spectrum(&map, &obs, &EnsembleConfig::new(100_000, 20, 21, 1)).unwrap();
    assert_eq!(a, again);
}

#[test]
fn coded_spectrum_matches_full_shift_counting_at_one_half() {
    let mp = MPMap::new(0.5).unwrap();
    let obs = Observable::Indicator { lo: 0.5, hi: 1.0 };
    let schedule = DeltaSchedule::default();
    let n = NRange::new(8, 16).unwrap();
    let coded = mp_level_spectrum(&mp, &obs, &[0.5], &schedule, n).unwrap();
    let full = ShiftSpace::full(2).unwrap();
    let phi = Potential::indicator(&full, 1);
    let zero = Potential::constant(&full, 0.0);
    let direct = direct_level_pressure(&full, &phi, &zero, 0.5, &schedule, n).unwrap();
    let f = coded.points[0].value.unwrap();
    assert!((f - direct.value).abs() <= 0.01, "{f} vs {}", direct.value);
}
