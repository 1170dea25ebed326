//! Property tests for the library-wide invariants.

use proptest::prelude::*;

use layercast_core::fading::FadingLaw;
use layercast_core::mac::{self, MacConfig};
use layercast_core::numerics;
use layercast_core::parallel::{Alloc, TwoStateParallel};
use layercast_core::queue::{k_layer_queue_bounds, QueueServiceLaw};
use layercast_core::siso;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lambert_w_inverts_everywhere(x in 1e-6f64..1e6) {
        let w = numerics::lambert_w0(x).unwrap();
        prop_assert!((w * w.exp() - x).abs() <= 1e-9 * x.max(1.0));
    }

    #[test]
    fn queue_bounds_ordered_for_stable_configs(
        rates in prop::collection::vec(0.05f64..2.0, 1..6),
        raw_probs in prop::collection::vec(0.01f64..1.0, 6),
        load in 0.05f64..0.9,
    ) {
        let k = rates.len();
        let total: f64 = raw_probs[..k].iter().sum::<f64>() * 1.25;
        let probs: Vec<f64> = raw_probs[..k].iter().map(|p| p / total).collect();
        let svc = QueueServiceLaw::from_layer_rates(&rates, probs).unwrap();
        let lambda = load * svc.mean_service();
        if lambda > 0.0 {
            let b = k_layer_queue_bounds(&svc, lambda).unwrap();
            prop_assert!(b.lower <= b.upper + 1e-12);
            prop_assert!(b.lower >= 0.0);
        }
    }

    #[test]
    fn rate_ordering_for_random_snr(p in 0.1f64..1000.0) {
        let law = FadingLaw::rayleigh(1.0).unwrap();
        let outage = siso::outage_capacity(&law, p).rate;
        let bs = siso::rayleigh_expected_rate(p);
        let erg = siso::rayleigh_ergodic_capacity(1.0, p);
        prop_assert!(outage <= bs + 1e-9);
        prop_assert!(bs <= erg + 1e-9);
        prop_assert!(erg <= (1.0 + p).ln() + 1e-9);
    }

    #[test]
    fn parallel_decomposition_identity(
        alpha in 0.0f64..1.0,
        raw in prop::collection::vec(0.01f64..1.0, 3),
        p_a in 0.05f64..0.95,
        power in 0.1f64..100.0,
    ) {
        let total: f64 = raw.iter().sum();
        let alloc = Alloc::new(alpha, raw[0] / total, raw[1] / total, raw[2] / total).unwrap();
        let cfg = TwoStateParallel::new(0.5, 2.0, p_a, power).unwrap();
        let a = layercast_core::parallel::extended_average_rate(&cfg, &alloc);
        let b = layercast_core::parallel::state_sum_rate(&cfg, &alloc);
        prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn mac_cumulative_sums_stay_in_unit_interval(
        raw in prop::collection::vec(0.01f64..1.0, 9),
    ) {
        let total: f64 = raw.iter().sum();
        let beta: Vec<Vec<f64>> = (0..3)
            .map(|r| (0..3).map(|c| raw[3 * r + c] / total).collect())
            .collect();
        for u in 1..=2usize {
            for v in (u + 1)..=3usize {
                for j in u..=3usize {
                    let sums = mac::cumulative_sums(&beta, j, u, v);
                    for (k, b) in sums.iter().enumerate() {
                        prop_assert!(
                            (-1e-9..=1.0 + 1e-9).contains(b),
                            "B{} out of range: {b}", k + 1
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn mac_region_chain_for_random_symmetric_splits(
        raw in prop::collection::vec(0.01f64..1.0, 4),
    ) {
        let total: f64 = raw.iter().sum();
        let b: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let cfg = MacConfig::two_state(0.25, 1.0, 0.5, 0.5, 10.0).unwrap();
        let split =
            mac::PowerSplit::symmetric(vec![vec![b[0], b[1]], vec![b[2], b[3]]]).unwrap();
        let full = mac::full_region(&cfg, &split).unwrap();
        let outer = mac::outer_bound(&cfg, &split).unwrap();
        let [r11, r12, r21, r1, r12p, r21p, r22] = mac::two_state_bounds(&cfg, &split).unwrap();
        // Any corner of the full region must satisfy the outer bound.
        let a = r12.min(r1).min(0.5 * r12p);
        let bb = r21.min((r1 - a).max(0.0)).min((r21p - a).max(0.0) / 2.0);
        let pt = vec![r11, a, bb, r22];
        prop_assert!(full.contains(&pt, 1e-9));
        prop_assert!(outer.contains(&pt, 1e-9), "outer violated at {pt:?}");
    }

    #[test]
    fn average_sum_rate_monotone_in_weak_probability(
        raw in prop::collection::vec(0.01f64..1.0, 4),
        p1 in 0.0f64..1.0,
        p2 in 0.0f64..1.0,
    ) {
        let total: f64 = raw.iter().sum();
        let rates = [raw[0] / total, raw[1] / total, raw[2] / total, raw[3] / total];
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        prop_assert!(
            mac::average_sum_rate(&rates, hi) <= mac::average_sum_rate(&rates, lo) + 1e-12
        );
    }
}
