//! Spot checks that the derivative-free split optimizers reach (or beat)
//! dense random-search baselines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use layercast_core::mac::{self, MacConfig, PowerSplit};

#[test]
fn average_rate_optimizer_beats_random_search() {
    let cfg = MacConfig::two_state(0.5, 1.0, 0.5, 0.5, 10.0).unwrap();
    for &p_weak in &[0.0, 0.3, 0.7] {
        let (_, opt) = mac::optimize_average_sum_rate(&cfg, p_weak);
        let mut rng = ChaCha8Rng::seed_from_u64(606);
        let mut best = f64::NEG_INFINITY;
        for _ in 0..20_000 {
            let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(1e-6..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let split = PowerSplit::symmetric(vec![
                vec![raw[0] / total, raw[1] / total],
                vec![raw[2] / total, raw[3] / total],
            ])
            .unwrap();
            let [r11, r12, r21, r1, r12p, r21p, r22] =
                mac::two_state_bounds(&cfg, &split).unwrap();
            // Exact vertex scan of the coupled-pair polytope.
            let cap = |a: f64| -> f64 {
                r21.min(r1 - a).min(r12p - 2.0 * a).min((r21p - a) / 2.0).max(0.0)
            };
            let mut pair = 0.0f64;
            for &a in &[
                0.0,
                r12,
                r1 - r21,
                (r12p - r21) / 2.0,
                r21p - 2.0 * r21,
                r1.min(r12),
                (r12p / 2.0).min(r12),
                r12p - r1,
                2.0 * r1 - r21p,
                (2.0 * r12p - r21p) / 3.0,
            ] {
                if a.is_finite() && (0.0..=r12).contains(&a) {
                    pair = pair.max(a + cap(a));
                }
            }
            let q = 1.0 - p_weak;
            best = best.max(2.0 * (r11 + q * pair + q * q * r22));
        }
        assert!(
            opt >= best - 1e-6,
            "p_weak={p_weak}: optimizer {opt} below random search {best}"
        );
    }
}
