use multifrac::symbolic::{Potential, ShiftMetric, ShiftSpace, Word};
use proptest::prelude::*;

/// Mixing shifts on 2 to 4 symbols.
fn mixing_shift() -> impl Strategy<Value = ShiftSpace> {
    (2usize..=4)
        .prop_flat_map(|k| proptest::collection::vec(proptest::collection::vec(any::<bool>(), k), k))
        .prop_filter_map("not mixing", |rows| {
            let s = ShiftSpace::new(rows).ok()?;
            s.mixing_gap().ok()?;
            Some(s)
        })
}

fn memory_one(space: &ShiftSpace, values: &[f64]) -> Potential {
    Potential::from_fn(space, 1, |w| values[w[0] as usize]).unwrap()
}

// Σ_ij (A^{n-1})_ij by repeated multiplication, independent of the enumerator
fn matrix_count(space: &ShiftSpace, n: usize) -> u128 {
    let a = space.matrix();
    let k = a.len();
    let mut v = vec![1u128; k];
    for _ in 1..n {
        v = (0..k).map(|i| (0..k).map(|j| a[i][j] as u128 * v[j]).sum()).collect();
    }
    v.iter().sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_matches_matrix_powers(space in mixing_shift(), n in 1usize..=12) {
        let listed = space.words(n).count() as u128;
        prop_assert_eq!(listed, matrix_count(&space, n));
        prop_assert_eq!(space.count_words(n), listed);
    }

    #[test]
    fn enumerated_words_are_admissible_and_sorted(space in mixing_shift(), n in 1usize..=8) {
        let words: Vec<Word> = space.words(n).collect();
        for w in &words {
            prop_assert!(space.is_admissible(w.symbols()));
        }
        prop_assert!(words.windows(2).all(|p| p[0].symbols() < p[1].symbols()));
    }

    #[test]
    fn doubling_a_periodic_word_doubles_its_sum(
        values in proptest::collection::vec(-5.0f64..5.0, 4),
        symbols in proptest::collection::vec(0u8..4, 1..20),
    ) {
        let space = ShiftSpace::full(4).unwrap();
        let pot = memory_one(&space, &values);
        let w = Word::from_symbols(symbols);
        let once = pot.birkhoff_sum(&w).unwrap();
        let twice = pot.birkhoff_sum(&w.concat(&w)).unwrap();
        prop_assert!((twice - 2.0 * once).abs() <= 1e-12 * (1.0 + once.abs()));
    }

    #[test]
    fn unit_separation_keeps_every_word(space in mixing_shift(), n in 1usize..=10) {
        let set = space.separated_set(&ShiftMetric::default(), n, 1.0).unwrap();
        prop_assert_eq!(set.len(), space.words(n).count());
    }

    #[test]
    fn variation_grows_with_eps_and_vanishes_below_memory_scale(
        values in proptest::collection::vec(-3.0f64..3.0, 8),
        memory in 1usize..=3,
        e1 in 0.001f64..1.0,
        e2 in 0.001f64..1.0,
    ) {
        let space = ShiftSpace::full(2).unwrap();
        let pot = Potential::from_fn(&space, memory, |w| {
            values[w.iter().fold(0usize, |acc, &s| 2 * acc + s as usize)]
        })
        .unwrap();
        let metric = ShiftMetric::default();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(pot.variation(&metric, lo) <= pot.variation(&metric, hi));
        let scale = metric.theta().powi(memory as i32 - 1);
        prop_assert_eq!(pot.variation(&metric, scale * 0.999), 0.0);
    }

    #[test]
    fn bridges_of_gap_length_join_any_two_words(space in mixing_shift(), a in 0u8..4, c in 0u8..4) {
        let k = space.alphabet_size() as u8;
        let (a, c) = (a % k, c % k);
        let g = space.mixing_gap().unwrap();
        let b = space.smallest_bridge(a, c, g).expect("a bridge of gap length exists");
        let mut joined = vec![a];
        joined.extend(&b);
        joined.push(c);
        prop_assert_eq!(b.len(), g);
        prop_assert!(space.is_admissible(&joined));
    }
}

#[test]
fn golden_mean_bridges_exhaustively() {
    let gm = ShiftSpace::golden_mean();
    let g = gm.mixing_gap().unwrap();
    assert_eq!(g, 2);
    let words: Vec<Word> = (1..=8).flat_map(|n| gm.words(n)).collect();
    for u in &words {
        for v in &words {
            let b = gm
                .smallest_bridge(u.last().unwrap(), v.first().unwrap(), g)
                .unwrap_or_else(|| panic!("no bridge from {u} to {v}"));
            let mut joined = u.symbols().to_vec();
            joined.extend(&b);
            joined.extend(v.symbols());
            assert!(gm.is_admissible(&joined), "{u}·{b:?}·{v}");
        }
    }
}

#[test]
fn malformed_rows_are_rejected() {
    assert!(ShiftSpace::from_row_strings(&["11", "00"]).is_err());
    assert!(ShiftSpace::from_row_strings(&["1", "10"]).is_err());
}
