mod common;

use common::{library_value, max_relative_error, naive_value};
use hetdetect_core::statistics::StatisticId;
use proptest::prelude::*;

#[test]
fn every_statistic_matches_naive_loops() {
    let err = max_relative_error(200, 7);
    assert!(err < 1e-10, "worst relative error {err:e}");
}

#[test]
fn centered_baseline_vanishes_on_a_line() {
    // Differences of a line are constant, so R_i² − R̄² is 0 up to rounding.
    let y: Vec<f64> = (0..=40).map(|i| 2.0 + 0.5 * i as f64).collect();
    assert!(library_value(StatisticId::Dette2002, false, 0.3, &y).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn shift_invariance(seed in any::<u64>(), shift in -50.0f64..50.0, n in 8usize..48) {
        let mut rng = common::rng(seed);
        let y = common::random_sample(&mut rng, n);
        let moved: Vec<f64> = y.iter().map(|v| v + shift).collect();
        for id in StatisticId::ALL {
            let a = library_value(id, false, 0.5, &y);
            let b = library_value(id, false, 0.5, &moved);
            let scale = naive_value(id, false, 0.5, &y).scale;
            prop_assert!((a - b).abs() <= 1e-9 * scale, "{} {} {}", id, a, b);
        }
    }

    #[test]
    fn quartic_scaling(seed in any::<u64>(), lambda in 0.1f64..10.0, n in 8usize..48) {
        let mut rng = common::rng(seed);
        let y = common::random_sample(&mut rng, n);
        let scaled: Vec<f64> = y.iter().map(|v| v * lambda).collect();
        for id in StatisticId::ALL {
            let a = library_value(id, true, 0.5, &y) * lambda.powi(4);
            let b = library_value(id, true, 0.5, &scaled);
            let scale = naive_value(id, true, 0.5, &scaled).scale;
            prop_assert!((a - b).abs() <= 1e-10 * scale, "{} {} {}", id, a, b);
        }
    }

    #[test]
    fn fast_equals_naive(seed in any::<u64>(), n in 8usize..64, u in 0.0f64..1.0) {
        let lo = (6.0 / n as f64).max(0.15);
        let h = lo + u * (0.9 - lo);
        let mut rng = common::rng(seed);
        let y = common::random_sample(&mut rng, n);
        for id in StatisticId::ALL {
            let fast = library_value(id, false, h, &y);
            let slow = naive_value(id, false, h, &y);
            prop_assert!((fast - slow.value).abs() <= 1e-10 * slow.scale, "{} {} {}", id, fast, slow.value);
        }
    }
}
