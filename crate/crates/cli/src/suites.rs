//! Verification suites: each suite runs one of the numbered checks at its
//! pinned tolerance and reports pass/fail with a diagnostic line. The
//! acceptance test target drives the same functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use layercast_core::bottleneck::{self, BottleneckConfig};
use layercast_core::fading::{DiscreteStates, FadingLaw};
use layercast_core::harvest::{self, BlockUtility, HarvestProfile};
use layercast_core::mac::{self, MacConfig, PowerSplit};
use layercast_core::mixed::{self, DcNdcConfig};
use layercast_core::parallel::{self, Alloc, TwoStateParallel};
use layercast_core::queue::{self, QueueServiceLaw};
use layercast_core::relay::{self, RelayConfig};
use layercast_core::siso;
use layercast_core::sr::{self, SrConfig};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.to_string(), passed, detail }
    }
}

pub const SUITES: &[&str] = &[
    "siso-closed-form",
    "siso-asymptotes",
    "siso-ordering",
    "siso-montecarlo",
    "mac-inclusion",
    "mac-average-rate",
    "relay-scheme1",
    "relay-af-law",
    "queue-bounds",
    "mixed-delay",
    "parallel-twostate",
    "sr-distortion",
    "bottleneck",
    "harvest-bruteforce",
    "determinism",
];

pub fn run_suite(name: &str) -> Option<Vec<Check>> {
    Some(match name {
        "siso-closed-form" => siso_closed_form(),
        "siso-asymptotes" => siso_asymptotes(),
        "siso-ordering" => siso_ordering(),
        "siso-montecarlo" => siso_monte_carlo(),
        "mac-inclusion" => mac_inclusion(),
        "mac-average-rate" => mac_average_rate(),
        "relay-scheme1" => relay_scheme1(),
        "relay-af-law" => relay_af_law(),
        "queue-bounds" => queue_bounds(),
        "mixed-delay" => mixed_delay(),
        "parallel-twostate" => parallel_twostate(),
        "sr-distortion" => sr_distortion(),
        "bottleneck" => bottleneck_suite(),
        "harvest-bruteforce" => harvest_bruteforce(),
        "determinism" => determinism(),
        _ => return None,
    })
}

fn rayleigh() -> FadingLaw {
    FadingLaw::rayleigh(1.0).unwrap()
}

// Criterion 1: numeric layering solver vs Rayleigh closed form.
pub fn siso_closed_form() -> Vec<Check> {
    let law = rayleigh();
    let mut worst_i = 0.0f64;
    let mut worst_r = 0.0f64;
    for &p in &[0.1, 1.0, 10.0, 100.0] {
        let profile = siso::optimal_profile(&law, p).expect("rayleigh profile");
        for k in 0..=50 {
            let s = profile.s0 + (profile.s1 - profile.s0) * k as f64 / 50.0;
            let closed = (1.0 / (s * s) - 1.0 / s).clamp(0.0, p);
            worst_i = worst_i.max((profile.residual_interference(s) - closed).abs());
        }
        let numeric = siso::expected_rate(&profile, &law);
        worst_r = worst_r.max((numeric - siso::rayleigh_expected_rate(p)).abs());
    }
    vec![
        Check::new("1a interference vs closed form", worst_i <= 1e-6, format!("max |dI| = {worst_i:.3e} (<= 1e-6)")),
        Check::new("1b expected rate vs closed form", worst_r <= 1e-6, format!("max |dR| = {worst_r:.3e} (<= 1e-6)")),
    ]
}

// Criterion 2: high-SNR asymptotes at P = 100.
pub fn siso_asymptotes() -> Vec<Check> {
    let r100 = siso::rayleigh_expected_rate(100.0);
    let target_r = (100.0f64 / 9.256).ln();
    let rel_r = (r100 - target_r).abs() / r100;
    let c100 = siso::rayleigh_ergodic_capacity(1.0, 100.0);
    let target_c = (100.0f64 / 1.78).ln();
    let rel_c = (c100 - target_c).abs() / c100;
    // The layering asymptote carries an O(1/sqrt(P)) correction and is
    // ~14% off at P=100; reported as stated plus a large-P diagnostic.
    let r_big = siso::rayleigh_expected_rate(1e6);
    let rel_big = (r_big - (1e6f64 / 9.256).ln()).abs() / r_big;
    vec![
        Check::new("2a R_bs(100) vs ln(100/9.256) within 2%", rel_r <= 0.02, format!("R_bs = {r100:.6}, target {target_r:.6}, rel err {rel_r:.4}")),
        Check::new("2b C_erg(100) vs ln(100/1.78) within 2%", rel_c <= 0.02, format!("C_erg = {c100:.6}, target {target_c:.6}, rel err {rel_c:.4}")),
        Check::new("2c diagnostic: R_bs(1e6) vs ln(P/9.256) within 2%", rel_big <= 0.02, format!("rel err {rel_big:.2e}")),
    ]
}

// Criterion 3: rate ordering at 20 log-spaced SNRs, no tolerance.
pub fn siso_ordering() -> Vec<Check> {
    let law = rayleigh();
    let mut ok = true;
    let mut detail = String::new();
    for k in 0..20 {
        let p = 10f64.powf(-1.0 + 4.0 * k as f64 / 19.0);
        let outage = siso::outage_capacity(&law, p).rate;
        let bs = siso::rayleigh_expected_rate(p);
        let erg = siso::rayleigh_ergodic_capacity(1.0, p);
        let awgn = (1.0 + p).ln();
        if !(outage <= bs && bs <= erg && erg <= awgn) {
            ok = false;
            detail = format!("violated at P = {p}");
            break;
        }
    }
    if ok {
        detail = "R_o <= R_bs <= C_erg <= ln(1+P) at 20 log-spaced P in [0.1, 1000]".into();
    }
    vec![Check::new("3 rate ordering", ok, detail)]
}

// Criterion 4: Monte-Carlo mean of the cumulative rate at P = 10.
pub fn siso_monte_carlo() -> Vec<Check> {
    let law = rayleigh();
    let p = 10.0;
    let profile = siso::optimal_profile(&law, p).unwrap();
    let analytic = siso::expected_rate(&profile, &law);
    let s0 = profile.s0;
    let draws = law.sample(1_000_000, 424242);
    let mc: f64 = draws
        .iter()
        .map(|&s| {
            if s <= s0 {
                0.0
            } else if s >= 1.0 {
                -2.0 * s0.ln() - (1.0 - s0)
            } else {
                2.0 * (s / s0).ln() - (s - s0)
            }
        })
        .sum::<f64>()
        / draws.len() as f64;
    let rel = (mc - analytic).abs() / analytic;
    vec![Check::new("4 Monte-Carlo mean rate", rel <= 0.005, format!("sampled {mc:.6} vs analytic {analytic:.6}, rel err {rel:.4}"))]
}

// Criterion 5: region chain for 100 random splits at SNR 10, gains (0.5, 1).
pub fn mac_inclusion() -> Vec<Check> {
    let cfg = MacConfig::two_state(0.5, 1.0, 0.5, 0.5, 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut ok = true;
    for _ in 0..100 {
        let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let b: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let split = PowerSplit::symmetric(vec![vec![b[0], b[1]], vec![b[2], b[3]]]).unwrap();

        // full(split) inside outer(split): corners of the box satisfy the
        // outer caps.
        let [r11, r12, r21, r1, r12p, r21p, r22] = mac::two_state_bounds(&cfg, &split).unwrap();
        let outer = mac::outer_bound(&cfg, &split).unwrap();
        let a = r12.min(r1).min(0.5 * r12p);
        let bb = r21.min((r1 - a).max(0.0)).min(((r21p - a).max(0.0)) / 2.0);
        for pt in [
            vec![r11, a, bb, r22],
            vec![r11, r12.min(r1).min(0.5 * r12p), 0.0, r22],
            vec![r11, 0.0, r21.min(r1).min(0.5 * r21p), r22],
        ] {
            let slack = outer
                .constraints
                .iter()
                .map(|c| {
                    c.coeffs.iter().zip(&pt).map(|(w, x)| w * x).sum::<f64>() - c.bound
                })
                .fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(slack);
            if slack > 1e-9 {
                ok = false;
            }
        }

        // reduced(split) inside the full scheme: remap the strong-stream
        // fraction onto the double-strong codebook.
        let (w0, w1) = (b[0] / (b[0] + b[1]), b[1] / (b[0] + b[1]));
        let reduced_split = PowerSplit::symmetric(vec![vec![w0, w1], vec![0.0, 0.0]]).unwrap();
        let reduced = mac::reduced_region(&cfg, &reduced_split).unwrap();
        let rw = reduced.constraints[0].bound;
        let rs = reduced.constraints[1].bound;
        let remapped = PowerSplit::symmetric(vec![vec![w0, 0.0], vec![0.0, w1]]).unwrap();
        let full_rm = mac::full_region(&cfg, &remapped).unwrap();
        let pt = vec![rw / 2.0, 0.0, 0.0, rs / 2.0];
        let slack = full_rm
            .constraints
            .iter()
            .map(|c| c.coeffs.iter().zip(&pt).map(|(w, x)| w * x).sum::<f64>() - c.bound)
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(slack);
        if slack > 1e-9 {
            ok = false;
        }
        let outer_rm = mac::outer_bound(&cfg, &remapped).unwrap();
        if !outer_rm.contains(&pt, 1e-9) {
            ok = false;
        }
    }
    vec![Check::new("5 region inclusion chain", ok, format!("100 random splits, worst constraint slack {worst:.3e} (<= 1e-9)"))]
}

// Criterion 6: average-rate formula consistency at p -> 0.
pub fn mac_average_rate() -> Vec<Check> {
    let cfg = MacConfig::two_state(0.5, 1.0, 0.5, 0.5, 10.0).unwrap();
    let (split, avg) = mac::optimize_average_sum_rate(&cfg, 0.0);
    let [r11, r12, r21, r1, r12p, r21p, r22] = mac::two_state_bounds(&cfg, &split).unwrap();
    // Best sum of the coupled pair under its five constraints: the
    // objective a + cap(a) is piecewise-linear concave, so a vertex scan
    // over every breakpoint candidate is exact.
    let cap = |a: f64| -> f64 {
        if a < 0.0 || a > r12 {
            return f64::NEG_INFINITY;
        }
        r21.min(r1 - a).min(r12p - 2.0 * a).min((r21p - a) / 2.0).max(0.0)
    };
    let mut candidates = vec![0.0, r12, r1 - r21, (r12p - r21) / 2.0, r21p - 2.0 * r21];
    candidates.push(r1.min(r12));
    candidates.push((r12p / 2.0).min(r12));
    // Crossings between the sloped pieces.
    candidates.push(r12p - r1);
    candidates.push(2.0 * r1 - r21p);
    candidates.push((2.0 * r12p - r21p) / 3.0);
    let mut pair = 0.0f64;
    for &a in &candidates {
        if a.is_finite() && a >= 0.0 && a <= r12 {
            pair = pair.max(a + cap(a));
        }
    }
    let direct_sum = r11 + pair + r22;
    let diff = (avg - 2.0 * direct_sum).abs();
    vec![Check::new("6 average rate at p=0 equals twice the sum optimum", diff <= 1e-6, format!("avg {avg:.9} vs 2x sum {:.9}, |diff| = {diff:.2e}", 2.0 * direct_sum))]
}

/// Independent discrete oracle for the constrained relay layering:
/// per-layer rates on a gain grid with the total rate pinned by pairwise
/// exchanges and the power budget enforced through a scalar dual.
///
/// Power of a rate vector, peeled from the top layer down:
/// T_{k-1} = e^{r_k} T_k + (e^{r_k} - 1)/x_k; the budget is T_0.

/// Plain golden-section maximization without the coarse pre-scan, for the
/// smooth pair-exchange subproblems of the relay oracle.
fn golden_max(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..48 {
        if (b - a).abs() < 1e-11 {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn staircase_power(grid: &[f64], rates: &[f64]) -> f64 {
    let mut t = 0.0f64;
    for k in (0..grid.len()).rev() {
        let e = rates[k].exp();
        t = e * t + (e - 1.0) / grid[k];
    }
    t
}

fn relay_exchange_solve(
    grid: &[f64],
    target_rate: f64,
    budget: f64,
) -> (Vec<f64>, f64) {
    let layers = grid.len();
    let sf: Vec<f64> = grid.iter().map(|&x| (-x).exp()).collect();
    let value = |r: &[f64]| -> f64 { r.iter().zip(&sf).map(|(a, b)| a * b).sum() };

    // For a fixed power dual, improve sum (sf_k - mu * dPower) by moving
    // rate between pairs; pairs mix short and long range so mass can
    // migrate across the grid quickly.
    let optimize_for_mu = |mu: f64, start: &[f64]| -> Vec<f64> {
        let mut r = start.to_vec();
        let mut obj = value(&r) - mu * staircase_power(grid, &r);
        let mut scratch = r.clone();
        for _sweep in 0..16 {
            let mut improved = false;
            for i in 0..layers {
                for &stride in &[1usize, 3, 11, 37, 97] {
                    let j = i + stride;
                    if j >= layers {
                        break;
                    }
                    if r[i] == 0.0 && r[j] == 0.0 {
                        continue;
                    }
                    scratch.copy_from_slice(&r);
                    // Move t from layer j down to layer i (t may be
                    // negative, moving rate up).
                    let mut local = |t: f64| -> f64 {
                        if -t > r[i] || t > r[j] {
                            return f64::NEG_INFINITY;
                        }
                        scratch[i] = r[i] + t;
                        scratch[j] = r[j] - t;
                        let v = value(&scratch) - mu * staircase_power(grid, &scratch);
                        scratch[i] = r[i];
                        scratch[j] = r[j];
                        v
                    };
                    let (t, cand) = golden_max(&mut local, -r[i], r[j]);
                    if cand > obj + 1e-13 {
                        r[i] += t;
                        r[j] -= t;
                        obj = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        r
    };

    // Outer dual bisection: the optimized power decreases as mu grows.
    let uniform = vec![target_rate / layers as f64; layers];
    let (mut mu_lo, mut mu_hi) = (0.0f64, 2.0f64);
    // Grow mu_hi until the power fits the budget.
    let mut r_hi = optimize_for_mu(mu_hi, &uniform);
    for _ in 0..20 {
        if staircase_power(grid, &r_hi) <= budget {
            break;
        }
        mu_hi *= 2.0;
        r_hi = optimize_for_mu(mu_hi, &uniform);
    }
    let mut best = r_hi;
    for _ in 0..30 {
        let mu = 0.5 * (mu_lo + mu_hi);
        let r = optimize_for_mu(mu, &best);
        if staircase_power(grid, &r) > budget {
            mu_lo = mu;
        } else {
            mu_hi = mu;
            best = r;
        }
    }
    let v = value(&best);
    (best, v)
}

fn relay_staircase_oracle(ps: f64, pr: f64, s_source: f64, layers: usize) -> f64 {
    let target_rate = (1.0 + ps * s_source).ln();
    // Phase 1: locate the active gain range on a coarse wide grid.
    let coarse: Vec<f64> = (0..80).map(|i| 0.02 + 2.3 * i as f64 / 80.0).collect();
    let (r_coarse, _) = relay_exchange_solve(&coarse, target_rate, pr);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (k, &r) in r_coarse.iter().enumerate() {
        if r > 1e-4 * target_rate {
            lo = lo.min(coarse[k]);
            hi = hi.max(coarse[k]);
        }
    }
    if !lo.is_finite() || hi <= lo {
        lo = 0.05;
        hi = 1.0;
    }
    // Phase 2: requested layer count concentrated on the active range.
    let a = (0.7 * lo).max(0.01);
    let b = (1.3 * hi).min(2.4);
    let grid: Vec<f64> =
        (0..layers).map(|i| a + (b - a) * i as f64 / (layers - 1) as f64).collect();
    let (_, v) = relay_exchange_solve(&grid, target_rate, pr);
    (-s_source).exp() * v
}

// Criterion 7: relay scheme with outage source and layered relay.
pub fn relay_scheme1() -> Vec<Check> {
    let mut checks = Vec::new();
    for &p in &[1.0, 10.0] {
        let cfg = RelayConfig::new(p, p);
        let sol = relay::scheme1_outage_broadcast(&cfg).expect("feasible scheme");
        let source_rate = (1.0 + p * sol.s_source).ln();
        let subsidiary = (sol.profile.total_rate() - source_rate).abs();
        checks.push(Check::new(
            &format!("7a subsidiary rate condition at P={p}"),
            subsidiary <= 1e-6,
            format!("|R_T - ln(1+Ps s)| = {subsidiary:.2e} (<= 1e-6)"),
        ));
        let oracle = relay_staircase_oracle(p, p, sol.s_source, 200);
        let rel = (sol.rate - oracle).abs() / sol.rate;
        checks.push(Check::new(
            &format!("7b end value vs 200-layer oracle at P={p}"),
            rel <= 0.005,
            format!("scheme {:.6} vs oracle {oracle:.6}, rel err {rel:.4}", sol.rate),
        ));
    }
    checks
}

// Criterion 8: AF equivalent law vs the empirical CDF of simulated pairs.
pub fn relay_af_law() -> Vec<Check> {
    let cfg = RelayConfig::new(10.0, 10.0);
    let n = 1_000_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut samples: Vec<f64> = (0..n)
        .map(|_| {
            let ss = -(1.0 - rng.gen::<f64>()).ln();
            let sr = -(1.0 - rng.gen::<f64>()).ln();
            10.0 * sr * ss / (10.0 * sr + 10.0 * ss + 1.0)
        })
        .collect();
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut worst = 0.0f64;
    for k in 1..60 {
        let x = 0.08 * k as f64;
        let empirical = samples.partition_point(|&v| v <= x) as f64 / n as f64;
        let analytic = relay::af_equivalent_cdf(&cfg, x);
        worst = worst.max((empirical - analytic).abs());
    }
    vec![Check::new("8 AF equivalent CDF vs simulation", worst <= 0.003, format!("sup-norm over the grid {worst:.5} (<= 0.003)"))]
}

// Criterion 9: Lindley simulation inside the analytic bounds.
pub fn queue_bounds() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut ok = true;
    let mut detail = String::new();
    for trial in 0..10 {
        let k = 1 + (trial % 4);
        let rates: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum::<f64>() * (1.0 + rng.gen_range(0.1..0.5));
        let probs: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let svc = QueueServiceLaw::from_layer_rates(&rates, probs).unwrap();
        let lambda = svc.mean_service() * rng.gen_range(0.3..0.8);
        let bounds = queue::k_layer_queue_bounds(&svc, lambda).unwrap();

        // One long run plus batch means for the standard error.
        let mut sampler = svc.sampler(1000 + trial as u64);
        let n = 1_000_000usize;
        let batches = 10usize;
        let mut w = 0.0f64;
        let mut batch_means = Vec::with_capacity(batches);
        for _ in 0..batches {
            let mut acc = 0.0;
            for _ in 0..(n / batches) {
                w = (w + lambda - sampler()).max(0.0);
                acc += w;
            }
            batch_means.push(acc / (n / batches) as f64);
        }
        let mean: f64 = batch_means[1..].iter().sum::<f64>() / (batches - 1) as f64;
        let var: f64 = batch_means[1..]
            .iter()
            .map(|m| (m - mean) * (m - mean))
            .sum::<f64>()
            / (batches - 2) as f64;
        let stderr = (var / (batches - 1) as f64).sqrt();
        let slack = 3.0 * stderr + 1e-9;
        if mean < bounds.lower - slack || mean > bounds.upper + slack {
            ok = false;
            detail = format!(
                "trial {trial}: simulated {mean:.4} outside [{:.4}, {:.4}] (3 sigma {slack:.4})",
                bounds.lower, bounds.upper
            );
            break;
        }
    }
    if ok {
        detail = "simulated means within bounds for 10 random stable configurations".into();
    }
    vec![Check::new("9 queue bounds contain simulation", ok, detail)]
}

// Criterion 10: mixed delay-constrained checks.
pub fn mixed_delay() -> Vec<Check> {
    let law = rayleigh();
    // (i) beta = 1 reduces the layered solution to the single-user profile.
    let c = DcNdcConfig::new(1.0, 10.0, law.clone()).unwrap();
    let bj = mixed::broadcast_joint(&c).unwrap();
    let su = siso::optimal_profile(&law, 10.0).unwrap();
    let mut worst = (bj.profile.s_lo - su.s0).abs().max((bj.profile.s_hi - su.s1).abs());
    for k in 0..=100 {
        let s = su.s0 * 1.000001 + (su.s1 * 0.999999 - su.s0 * 1.000001) * k as f64 / 100.0;
        worst = worst.max((bj.profile.interference(s) - su.residual_interference(s)).abs());
    }
    let check_i = Check::new("10a beta=1 profile equals single-user layering", worst <= 1e-8, format!("max |dI| = {worst:.2e} (<= 1e-8)"));

    // (ii) totals never exceed the ergodic capacity.
    let mut ok = true;
    let mut cap_detail = String::new();
    for &beta in &[0.2, 0.5, 0.9, 1.0] {
        for &p in &[1.0, 10.0, 100.0, 1000.0] {
            let c = DcNdcConfig::new(beta, p, law.clone()).unwrap();
            let erg = siso::ergodic_capacity(&law, p);
            let total_out = {
                let o = mixed::outage_joint(&c);
                o.dc_rate + o.ndc_rate
            };
            let total_bs = {
                let b = mixed::broadcast_joint(&c).unwrap();
                b.dc_rate + b.ndc_rate
            };
            if total_out > erg + 1e-9 || total_bs > erg + 1e-9 {
                ok = false;
                cap_detail = format!("cap violated at beta={beta}, P={p}");
            }
        }
    }
    if ok {
        cap_detail = "R_DC + R_NDC <= C_erg on the (beta, P) grid".into();
    }
    let check_ii = Check::new("10b totals below ergodic capacity", ok, cap_detail);

    // (iii) near-ergodic total at high SNR and beta = 0.9.
    let c = DcNdcConfig::new(0.9, 1000.0, law.clone()).unwrap();
    let bj = mixed::broadcast_joint(&c).unwrap();
    let erg = siso::ergodic_capacity(&law, 1000.0);
    let gap = (erg - bj.dc_rate - bj.ndc_rate) / erg;
    let check_iii = Check::new("10c total within 5% of ergodic at P=1e3, beta=0.9", gap.abs() <= 0.05, format!("relative gap {gap:.4} (<= 0.05)"));
    vec![check_i, check_ii, check_iii]
}

// Criterion 11: parallel two-state optimum vs brute force.
pub fn parallel_twostate() -> Vec<Check> {
    let cfg = TwoStateParallel::new(0.5, 2.0, 0.5, 10.0).unwrap();
    let (alloc, opt) = parallel::optimal_sum_rate(&cfg);
    let n = 30;
    let mut best = f64::NEG_INFINITY;
    let mut best_pt = (0.0, 0.0, 0.0, 0.0);
    for ia in 0..=n {
        for iaa in 0..=n {
            for icr in 0..=(n - iaa) {
                let cand = Alloc {
                    alpha: ia as f64 / n as f64,
                    alpha_aa: iaa as f64 / n as f64,
                    alpha_cr: icr as f64 / n as f64,
                    alpha_bb: 1.0 - (iaa + icr) as f64 / n as f64,
                };
                let v = parallel::extended_average_rate(&cfg, &cand);
                if v > best {
                    best = v;
                    best_pt = (cand.alpha, cand.alpha_aa, cand.alpha_cr, cand.alpha_bb);
                }
            }
        }
    }
    let bb_at_coarse_argmax = best_pt.3;
    // Two local refinement passes keep the oracle a pure grid search while
    // resolving the 1e-4 comparison.
    for pass in 0..2 {
        let h = 1.0 / (n as f64 * 10f64.powi(pass + 1));
        let center = best_pt;
        for ia in -10..=10i32 {
            for iaa in -10..=10i32 {
                for icr in -10..=10i32 {
                    let alpha = (center.0 + h * ia as f64).clamp(0.0, 1.0);
                    let alpha_aa = (center.1 + h * iaa as f64).clamp(0.0, 1.0);
                    let alpha_cr = (center.2 + h * icr as f64).clamp(0.0, 1.0 - alpha_aa);
                    let cand = Alloc {
                        alpha,
                        alpha_aa,
                        alpha_cr,
                        alpha_bb: 1.0 - alpha_aa - alpha_cr,
                    };
                    let v = parallel::extended_average_rate(&cfg, &cand);
                    if v > best {
                        best = v;
                        best_pt = (alpha, alpha_aa, alpha_cr, 1.0 - alpha_aa - alpha_cr);
                    }
                }
            }
        }
    }
    let sub = parallel::suboptimal_schemes(&cfg);
    vec![
        Check::new("11a closed form vs grid brute force", (best - opt).abs() <= 1e-4, format!("grid {best:.8} vs closed form {opt:.8}")),
        Check::new("11b grid argmax has no double-strong power", bb_at_coarse_argmax.abs() <= 1e-12 && alloc.alpha_bb == 0.0, format!("alpha_BB at argmax = {bb_at_coarse_argmax:.2e}")),
        Check::new(
            "11c reference schemes below the optimum",
            sub.independent <= opt + 1e-9 && sub.private_only <= opt + 1e-9 && sub.common_only <= opt + 1e-9,
            format!("ind {:.6}, prv {:.6}, cmn {:.6} vs opt {opt:.6}", sub.independent, sub.private_only, sub.common_only),
        ),
    ]
}

// Criterion 12: source distortion solutions.
pub fn sr_distortion() -> Vec<Check> {
    let law = rayleigh();
    let c = SrConfig::new(1.0, 10.0, law.clone());
    let (profile, d_cont) = sr::continuous_min_distortion(&c).unwrap();
    let check_a = Check::new("12a Rayleigh upper boundary at the mean gain", (profile.s2 - 1.0).abs() <= 1e-9, format!("s2 = {:.12}", profile.s2));

    let states = DiscreteStates::discretize_left_edges(&law, 200, 6.0);
    let (_, d_disc) = sr::discrete_min_distortion(&states, 1.0, 10.0).unwrap();
    let rel = (d_disc - d_cont).abs() / d_cont;
    let check_b = Check::new("12b 200-state solver within 1% of continuous", rel <= 0.01, format!("discrete {d_disc:.6} vs continuous {d_cont:.6}, rel {rel:.4}"));

    let mut ordered = true;
    let mut last = vec![f64::INFINITY; 3];
    for &p in &[1.0, 10.0, 100.0] {
        let mut row = Vec::new();
        for &b in &[0.5, 1.0, 2.0] {
            let (_, d) = sr::continuous_min_distortion(&SrConfig::new(b, p, law.clone())).unwrap();
            row.push(d);
        }
        if !(row[0] > row[1] && row[1] > row[2]) {
            ordered = false;
        }
        last = row;
    }
    let check_c = Check::new("12c distortion strictly ordered in bandwidth expansion", ordered, format!("at P=100: b=0.5/1/2 -> {last:?}"));
    vec![check_a, check_b, check_c]
}

// Criterion 13: bottleneck limits, complementarity and ordering.
pub fn bottleneck_suite() -> Vec<Check> {
    let law = rayleigh();
    // Complementarity at an active and an inactive cap.
    let mut comp_worst = 0.0f64;
    for &(cap, p) in &[(1.0, 1000.0), (50.0, 10.0)] {
        let cfg = BottleneckConfig::fixed(cap, p, law.clone()).unwrap();
        let (profile, _) = bottleneck::nonoblivious_broadcast(&cfg).unwrap();
        let total = profile.total_rate(&law);
        comp_worst = comp_worst.max((profile.lambda * (cap - total)).abs());
    }
    let check_a = Check::new("13a multiplier complementarity", comp_worst <= 1e-8, format!("max |lambda (C - total)| = {comp_worst:.2e}"));

    // Large-capacity limits recover the unconstrained layering values.
    let plain = 0.5 * siso::rayleigh_expected_rate(10.0);
    let cfg = BottleneckConfig::fixed(30.0, 10.0, law.clone()).unwrap();
    let (_, ob) = bottleneck::oblivious_broadcast(&cfg).unwrap();
    let (_, non) = bottleneck::nonoblivious_broadcast(&cfg).unwrap();
    let gap = (ob - plain).abs().max((non - plain).abs());
    let check_b = Check::new("13b large-capacity limit recovers plain layering", gap <= 1e-6, format!("max deviation {gap:.2e} (<= 1e-6)"));

    // Non-oblivious at least oblivious at C = 4 for P >= 1.
    let mut ok = true;
    let mut detail = String::new();
    for k in 0..8 {
        let p = 10f64.powf(3.0 * k as f64 / 7.0);
        let cfg = BottleneckConfig::fixed(4.0, p, law.clone()).unwrap();
        let (_, ob) = bottleneck::oblivious_broadcast(&cfg).unwrap();
        let (_, non) = bottleneck::nonoblivious_broadcast(&cfg).unwrap();
        if non < ob - 1e-9 {
            ok = false;
            detail = format!("ordering violated at P={p}: {non} < {ob}");
            break;
        }
    }
    if ok {
        detail = "non-oblivious >= oblivious at C=4 for P in [1, 1000]".into();
    }
    let check_c = Check::new("13c non-oblivious dominates oblivious at C=4", ok, detail);
    vec![check_a, check_b, check_c]
}

// Criterion 14: staircase allocation vs the exhaustive-subset oracle.
pub fn harvest_bruteforce() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(1414);
    let mut worst = 0.0f64;
    let mut v_ok = true;
    let mut tight_worst = 0.0f64;
    for trial in 0..20 {
        let b = 2 + (trial % 4);
        let laws: Vec<FadingLaw> = (0..b).map(|_| rayleigh()).collect();
        let mut gamma = Vec::new();
        let mut acc = 0.0;
        for _ in 0..b {
            acc += rng.gen_range(0.5..6.5);
            gamma.push(acc);
        }
        let profile = HarvestProfile::from_cumulative(gamma.clone()).unwrap();
        let (result, total) = harvest::end_to_end(&laws, &profile).unwrap();

        let utilities: Vec<BlockUtility> =
            laws.iter().map(|law| BlockUtility::new(law.clone())).collect();
        let oracle = exhaustive_subset_best(&utilities, &gamma);
        worst = worst.max((total - oracle).abs());

        for w in result.marginals.windows(2) {
            if w[0] <= w[1] + 1e-9 {
                v_ok = false;
            }
        }
        for &u in &result.dominant {
            let used: f64 = result.powers[..u].iter().sum();
            tight_worst = tight_worst.max((used - gamma[u - 1]).abs());
        }
    }
    vec![
        Check::new("14a staircase matches subset oracle", worst <= 1e-5, format!("worst |gap| = {worst:.2e} over 20 instances (<= 1e-5)")),
        Check::new("14b marginal sequence strictly decreasing", v_ok, "v_1 > v_2 > ... on every instance".into()),
        Check::new("14c dominant constraints tight", tight_worst <= 1e-8, format!("worst residual {tight_worst:.2e} (<= 1e-8)")),
    ]
}

fn exhaustive_subset_best(utilities: &[BlockUtility], gamma: &[f64]) -> f64 {
    let b = utilities.len();
    let mut best = f64::NEG_INFINITY;
    for mask in 0..(1u32 << (b - 1)) {
        let mut tight: Vec<usize> = (1..b).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        tight.push(b);
        let mut powers = vec![0.0; b];
        let mut start = 0usize;
        let mut prev_gamma = 0.0;
        let mut ok = true;
        for &end in &tight {
            let budget = gamma[end - 1] - prev_gamma;
            if budget < 0.0 {
                ok = false;
                break;
            }
            let group: Vec<&BlockUtility> = utilities[start..end].iter().collect();
            match harvest::solve_subproblem(&group, budget) {
                Ok(y) => {
                    for (k, &p) in y.iter().enumerate() {
                        powers[start + k] = p;
                    }
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
            start = end;
            prev_gamma = gamma[end - 1];
        }
        if !ok {
            continue;
        }
        let mut acc = 0.0;
        for (i, &p) in powers.iter().enumerate() {
            acc += p;
            if acc > gamma[i] + 1e-7 {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let value: f64 = powers.iter().zip(utilities).map(|(&p, u)| u.value(p)).sum();
        best = best.max(value);
    }
    best
}

// Criterion 15: byte-identical CSV output for a fixed config and seed.
pub fn determinism() -> Vec<Check> {
    let exe = match std::env::current_exe() {
        Ok(p) => p,
        Err(e) => {
            return vec![Check::new("15 deterministic CSV", false, format!("cannot locate binary: {e}"))]
        }
    };
    determinism_with_binary(&exe)
}

/// Runs the named binary twice on a temp config and compares the CSVs.
pub fn determinism_with_binary(exe: &std::path::Path) -> Vec<Check> {
    let dir = std::env::temp_dir().join(format!("layercast-det-{}", std::process::id()));
    let _ = std::fs::create_dir_all(&dir);
    let config_path = dir.join("scenario.toml");
    let csv_a = dir.join("a.csv");
    let csv_b = dir.join("b.csv");
    let config = r#"
model = "siso"
seed = 7

[law]
kind = "rayleigh"
mean = 1.0

[sweep]
parameter = "snr_db"
grid = [-5.0, 0.0, 5.0, 10.0, 15.0, 20.0]
"#;
    if std::fs::write(&config_path, config).is_err() {
        return vec![Check::new("15 deterministic CSV", false, "cannot write temp config".into())];
    }
    for out in [&csv_a, &csv_b] {
        let status = std::process::Command::new(exe)
            .arg("run")
            .arg(&config_path)
            .arg("--csv")
            .arg(out)
            .status();
        match status {
            Ok(s) if s.success() => {}
            other => {
                return vec![Check::new("15 deterministic CSV", false, format!("run failed: {other:?}"))]
            }
        }
    }
    let a = std::fs::read(&csv_a).unwrap_or_default();
    let b = std::fs::read(&csv_b).unwrap_or_default();
    let same = !a.is_empty() && a == b;
    let _ = std::fs::remove_dir_all(&dir);
    vec![Check::new("15 deterministic CSV", same, format!("two runs produced {} and {} bytes, identical: {same}", a.len(), b.len()))]
}
