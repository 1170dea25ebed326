//! Broadcast approach for the symmetric two-parallel two-state channel
//! (degraded Gaussian broadcast product channel): exact optimal sum rate
//! via the scalar closed form, plus the three sub-optimal reference
//! schemes.

use thiserror::Error;

use crate::numerics::{self, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParallelError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid allocation: {0}")]
    InvalidAlloc(String),
}

/// Symmetric two-parallel channel with two fading states per sub-channel.
#[derive(Debug, Clone, Copy)]
pub struct TwoStateParallel {
    /// Weak-state gain.
    pub nu_a: f64,
    /// Strong-state gain (> nu_a).
    pub nu_b: f64,
    /// Probability of the weak state per sub-channel.
    pub p_a: f64,
    /// Probability of the strong state per sub-channel.
    pub p_b: f64,
    /// Per-sub-channel transmit power.
    pub power: f64,
}

impl TwoStateParallel {
    pub fn new(nu_a: f64, nu_b: f64, p_a: f64, power: f64) -> Result<Self, ParallelError> {
        if !(nu_a > 0.0 && nu_b > nu_a) {
            return Err(ParallelError::InvalidConfig(format!(
                "need 0 < nu_a < nu_b, got ({nu_a}, {nu_b})"
            )));
        }
        if !(0.0..=1.0).contains(&p_a) {
            return Err(ParallelError::InvalidConfig(format!("state probability {p_a}")));
        }
        if !(power > 0.0) {
            return Err(ParallelError::InvalidConfig(format!("power {power}")));
        }
        Ok(TwoStateParallel { nu_a, nu_b, p_a, p_b: 1.0 - p_a, power })
    }
}

/// Power allocation: a common/private split `alpha` inside the crossed
/// codeword plus state fractions over {AA, crossed, BB}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alloc {
    pub alpha: f64,
    pub alpha_aa: f64,
    pub alpha_cr: f64,
    pub alpha_bb: f64,
}

impl Alloc {
    pub fn new(alpha: f64, alpha_aa: f64, alpha_cr: f64, alpha_bb: f64) -> Result<Self, ParallelError> {
        let sum = alpha_aa + alpha_cr + alpha_bb;
        if [alpha, alpha_aa, alpha_cr, alpha_bb].iter().any(|&v| !(0.0..=1.0 + 1e-12).contains(&v))
            || (sum - 1.0).abs() > 1e-9
        {
            return Err(ParallelError::InvalidAlloc(format!(
                "fractions must be in [0,1] with alpha_aa+alpha_cr+alpha_bb=1, got sum {sum}"
            )));
        }
        Ok(Alloc { alpha, alpha_aa, alpha_cr, alpha_bb })
    }
}

fn ln1p(x: f64) -> f64 {
    x.ln_1p()
}

/// Per-message rates of the layered scheme: AA decoded in every state, the
/// common and two private crossed messages in the mixed states, BB only
/// when both sub-channels are strong.
#[derive(Debug, Clone, Copy)]
pub struct SchemeRates {
    pub r_aa: f64,
    pub r_common: f64,
    pub r_crossed: f64,
    pub r_bb: f64,
}

pub fn scheme_rates(cfg: &TwoStateParallel, alloc: &Alloc) -> SchemeRates {
    let p = cfg.power;
    let (na, nb) = (cfg.nu_a, cfg.nu_b);
    let a_bar = 1.0 - alloc.alpha;
    let inv_a = 1.0 / na;
    let inv_b = 1.0 / nb;
    let aa_bar = alloc.alpha_cr + alloc.alpha_bb;
    let cr_res = a_bar * alloc.alpha_cr + alloc.alpha_bb;
    let r_aa = 2.0 * ln1p(alloc.alpha_aa * p / (inv_a + aa_bar * p));
    let r_common = ln1p(alloc.alpha * alloc.alpha_cr * p / (inv_b + cr_res * p))
        + ln1p(alloc.alpha * alloc.alpha_cr * p / (inv_a + cr_res * p));
    let r_crossed = ln1p(a_bar * alloc.alpha_cr * p / (inv_b + alloc.alpha_bb * p));
    let r_bb = 2.0 * ln1p(nb * alloc.alpha_bb * p);
    SchemeRates { r_aa, r_common, r_crossed, r_bb }
}

/// Expected sum rate as the direct average over the four channel states.
pub fn state_sum_rate(cfg: &TwoStateParallel, alloc: &Alloc) -> f64 {
    let r = scheme_rates(cfg, alloc);
    let (pa, pb) = (cfg.p_a, cfg.p_b);
    pa * pa * r.r_aa
        + pa * pb * (r.r_aa + r.r_common + r.r_crossed)
        + pb * pa * (r.r_aa + r.r_common + r.r_crossed)
        + pb * pb * (r.r_aa + r.r_common + 2.0 * r.r_crossed + r.r_bb)
}

/// State-sum terms regrouped by effective allocation argument:
/// R0 at 1-alpha_AA, R1 at 1-alpha_AA-alpha*alpha_cr, R2 at alpha_BB.
fn r0(cfg: &TwoStateParallel, arg: f64) -> f64 {
    let t = cfg.p_a + cfg.p_b;
    let pa2 = cfg.p_a * cfg.p_a;
    (t * t - pa2) * ln1p(cfg.nu_b * arg * cfg.power)
        - (t * t + pa2) * ln1p(cfg.nu_a * arg * cfg.power)
}

fn r1(cfg: &TwoStateParallel, arg: f64) -> f64 {
    let t = cfg.p_a + cfg.p_b;
    let pa2 = cfg.p_a * cfg.p_a;
    cfg.p_b * cfg.p_b * ln1p(cfg.nu_b * arg * cfg.power)
        - (t * t - pa2) * ln1p(cfg.nu_a * arg * cfg.power)
}

fn r2(cfg: &TwoStateParallel, arg: f64) -> f64 {
    -2.0 * cfg.p_a * cfg.p_b * ln1p(cfg.nu_b * arg * cfg.power)
}

/// Expected sum rate in the decomposed form
/// 2(P_A+P_B)^2 ln(1+nu_a P) + R0 + R1 + R2.
pub fn extended_average_rate(cfg: &TwoStateParallel, alloc: &Alloc) -> f64 {
    let t = cfg.p_a + cfg.p_b;
    let base = 2.0 * t * t * ln1p(cfg.nu_a * cfg.power);
    let arg0 = 1.0 - alloc.alpha_aa;
    let arg1 = 1.0 - alloc.alpha_aa - alloc.alpha * alloc.alpha_cr;
    let arg2 = alloc.alpha_bb;
    base + r0(cfg, arg0) + r1(cfg, arg1) + r2(cfg, arg2)
}

/// Clamped closed-form common/private split for a given alpha_AA.
fn alpha_opt(cfg: &TwoStateParallel, alpha_aa: f64) -> f64 {
    let t = cfg.p_a + cfg.p_b;
    let num = cfg.p_b * cfg.p_b * cfg.nu_b - (t * t - cfg.p_a * cfg.p_a) * cfg.nu_a;
    let rest = 1.0 - alpha_aa;
    if rest <= 1e-14 {
        return 1.0;
    }
    let den = 2.0 * cfg.p_a * cfg.p_b * cfg.nu_a * cfg.nu_b * cfg.power * rest;
    (1.0 - num / den).min(1.0).max(0.0)
}

/// Exact optimal sum rate: scalar search over alpha_AA with all remaining
/// power on the crossed codeword (the BB fraction is zero at the optimum).
pub fn optimal_sum_rate(cfg: &TwoStateParallel) -> (Alloc, f64) {
    let objective = |alpha_aa: f64| {
        let a = alpha_opt(cfg, alpha_aa);
        let arg1 = (1.0 - alpha_aa) * (1.0 - a);
        r0(cfg, 1.0 - alpha_aa) + r1(cfg, arg1)
    };
    let tol = Tolerance { abs_tol: 1e-12, rel_tol: 1e-12, max_iter: 300 };
    let (alpha_aa, inner) = numerics::maximize_scalar(objective, 0.0, 1.0, tol);
    let t = cfg.p_a + cfg.p_b;
    let rate = 2.0 * t * t * ln1p(cfg.nu_a * cfg.power) + inner;
    let alloc = Alloc {
        alpha: alpha_opt(cfg, alpha_aa),
        alpha_aa,
        alpha_cr: 1.0 - alpha_aa,
        alpha_bb: 0.0,
    };
    (alloc, rate)
}

/// Rates of the three reference schemes evaluated at their printed
/// closed-form allocations.
#[derive(Debug, Clone, Copy)]
pub struct SuboptimalRates {
    /// Disjoint two-layer broadcasting per sub-channel.
    pub independent: f64,
    /// No common message inside the crossed codeword (alpha = 0).
    pub private_only: f64,
    /// Common message only inside the crossed codeword (alpha = 1).
    pub common_only: f64,
}

pub fn suboptimal_schemes(cfg: &TwoStateParallel) -> SuboptimalRates {
    let (na, nb, pa, pb, p) = (cfg.nu_a, cfg.nu_b, cfg.p_a, cfg.p_b, cfg.power);
    let t = pa + pb;

    // Independent broadcasting over each sub-channel.
    let alpha_ind =
        (1.0 - (pb * nb - t * na) / (pa * na * nb * p)).min(1.0).max(0.0);
    let rest = 1.0 - alpha_ind;
    let independent = 2.0 * t * (ln1p(na * p) - ln1p(na * rest * p))
        + 2.0 * pb * ln1p(nb * rest * p);

    // Privately broadcasting: alpha = 0 at the printed alpha_AA.
    let alpha_aa_prv = (1.0
        - ((pb - pa) * nb - (pb + pa) * na) / (2.0 * pa * na * nb * p))
        .min(1.0)
        .max(0.0);
    let prv = Alloc {
        alpha: 0.0,
        alpha_aa: alpha_aa_prv,
        alpha_cr: 1.0 - alpha_aa_prv,
        alpha_bb: 0.0,
    };
    let private_only = extended_average_rate(cfg, &prv);

    // Common-only broadcasting: alpha = 1 at the printed alpha_AA.
    let alpha_aa_cmn = (1.0
        - ((t * t - pa * pa) * nb - (t * t + pa * pa) * na)
            / (2.0 * pa * pa * na * nb * p))
        .min(1.0)
        .max(0.0);
    let cmn = Alloc {
        alpha: 1.0,
        alpha_aa: alpha_aa_cmn,
        alpha_cr: 1.0 - alpha_aa_cmn,
        alpha_bb: 0.0,
    };
    let common_only = extended_average_rate(cfg, &cmn);

    SuboptimalRates { independent, private_only, common_only }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> TwoStateParallel {
        TwoStateParallel::new(0.5, 2.0, 0.5, 10.0).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(TwoStateParallel::new(2.0, 0.5, 0.5, 10.0).is_err());
        assert!(TwoStateParallel::new(0.5, 2.0, 1.5, 10.0).is_err());
        assert!(Alloc::new(0.5, 0.5, 0.4, 0.2).is_err());
    }

    #[test]
    fn all_power_on_aa() {
        let c = cfg();
        let alloc = Alloc::new(0.3, 1.0, 0.0, 0.0).unwrap();
        let expect = 2.0 * (cfg().p_a + cfg().p_b).powi(2) * (1.0 + c.nu_a * c.power).ln();
        assert!((extended_average_rate(&c, &alloc) - expect).abs() < 1e-12);
        assert!((state_sum_rate(&c, &alloc) - expect).abs() < 1e-12);
    }

    #[test]
    fn decomposition_matches_state_sum() {
        let c = cfg();
        // Deterministic sweep over the allocation simplex and alpha.
        for ia in 0..=5 {
            for iaa in 0..=4 {
                for icr in 0..=(4 - iaa) {
                    let alpha = ia as f64 / 5.0;
                    let alpha_aa = iaa as f64 / 4.0;
                    let alpha_cr = icr as f64 / 4.0;
                    let alpha_bb = 1.0 - alpha_aa - alpha_cr;
                    let alloc = Alloc::new(alpha, alpha_aa, alpha_cr, alpha_bb).unwrap();
                    let a = extended_average_rate(&c, &alloc);
                    let b = state_sum_rate(&c, &alloc);
                    assert!((a - b).abs() < 1e-10, "mismatch at {alloc:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn moving_bb_mass_to_crossed_never_hurts_at_optimum() {
        let c = cfg();
        let (opt_alloc, opt) = optimal_sum_rate(&c);
        assert_eq!(opt_alloc.alpha_bb, 0.0);
        for k in 1..=4 {
            let bb = 0.1 * k as f64;
            let alloc = Alloc::new(
                opt_alloc.alpha,
                opt_alloc.alpha_aa,
                (1.0 - opt_alloc.alpha_aa - bb).max(0.0),
                bb.min(1.0 - opt_alloc.alpha_aa),
            )
            .unwrap();
            assert!(extended_average_rate(&c, &alloc) <= opt + 1e-9);
        }
    }

    #[test]
    fn closed_form_matches_grid_brute_force() {
        let c = cfg();
        let (_, opt) = optimal_sum_rate(&c);
        // Coarse 30^4-style sweep plus two zoom passes near the incumbent.
        let mut best = f64::NEG_INFINITY;
        let mut best_pt = (0.0, 0.0, 0.0);
        let n = 30;
        for ia in 0..=n {
            for iaa in 0..=n {
                for icr in 0..=(n - iaa) {
                    let alpha = ia as f64 / n as f64;
                    let alpha_aa = iaa as f64 / n as f64;
                    let alpha_cr = icr as f64 / n as f64;
                    let alloc = Alloc {
                        alpha,
                        alpha_aa,
                        alpha_cr,
                        alpha_bb: 1.0 - alpha_aa - alpha_cr,
                    };
                    let v = extended_average_rate(&c, &alloc);
                    if v > best {
                        best = v;
                        best_pt = (alpha, alpha_aa, alpha_cr);
                    }
                }
            }
        }
        for pass in 0..2 {
            let h = 1.0 / (n as f64 * 10f64.powi(pass + 1));
            let (ca, caa, ccr) = best_pt;
            for ia in -10..=10i32 {
                for iaa in -10..=10i32 {
                    for icr in -10..=10i32 {
                        let alpha = (ca + h * ia as f64).clamp(0.0, 1.0);
                        let alpha_aa = (caa + h * iaa as f64).clamp(0.0, 1.0);
                        let alpha_cr =
                            (ccr + h * icr as f64).clamp(0.0, 1.0 - alpha_aa);
                        let alloc = Alloc {
                            alpha,
                            alpha_aa,
                            alpha_cr,
                            alpha_bb: 1.0 - alpha_aa - alpha_cr,
                        };
                        let v = extended_average_rate(&c, &alloc);
                        if v > best {
                            best = v;
                            best_pt = (alpha, alpha_aa, alpha_cr);
                        }
                    }
                }
            }
        }
        assert!((best - opt).abs() < 1e-4, "grid {best} vs closed form {opt}");
    }

    #[test]
    fn degenerate_all_weak() {
        // P_B -> 0: only the AA state matters.
        let c = TwoStateParallel::new(0.5, 2.0, 1.0 - 1e-12, 10.0).unwrap();
        let (_, opt) = optimal_sum_rate(&c);
        let aa_only = 2.0 * (1.0 + 0.5 * 10.0f64).ln();
        assert!((opt - aa_only).abs() < 1e-6, "{opt} vs {aa_only}");
    }

    #[test]
    fn suboptimal_schemes_below_optimum() {
        for &pa in &[0.2, 0.5, 0.8] {
            for &p in &[1.0, 10.0, 100.0] {
                let c = TwoStateParallel::new(0.5, 2.0, pa, p).unwrap();
                let (_, opt) = optimal_sum_rate(&c);
                let sub = suboptimal_schemes(&c);
                assert!(sub.independent <= opt + 1e-9, "ind {} > {opt}", sub.independent);
                assert!(sub.private_only <= opt + 1e-9, "prv {} > {opt}", sub.private_only);
                assert!(sub.common_only <= opt + 1e-9, "cmn {} > {opt}", sub.common_only);
            }
        }
        // Common-only is strictly below the optimum somewhere.
        let c = cfg();
        let (_, opt) = optimal_sum_rate(&c);
        let sub = suboptimal_schemes(&c);
        assert!(sub.common_only < opt - 1e-6);
    }

    #[test]
    fn clamp_activation_returns_zero_alpha() {
        // Large strong-state gain at tiny power drives the bracket
        // argument negative, so the clamp returns zero.
        let c = TwoStateParallel::new(0.5, 50.0, 0.5, 0.01).unwrap();
        let a = alpha_opt(&c, 0.3);
        assert_eq!(a, 0.0);
    }

    #[test]
    fn bb_argmax_is_zero_over_grid() {
        // Argmax over a coarse grid puts nothing on the BB codeword for a
        // spread of configurations.
        let mut lcg = 12345u64;
        let mut unit = move || {
            lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((lcg >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for _ in 0..10 {
            let nu_a = 0.2 + 0.6 * unit();
            let nu_b = nu_a + 0.5 + 2.0 * unit();
            let pa = 0.1 + 0.8 * unit();
            let p = 0.5 + 20.0 * unit();
            let c = TwoStateParallel::new(nu_a, nu_b, pa, p).unwrap();
            let n = 12;
            let mut best = (f64::NEG_INFINITY, 0.0);
            for ia in 0..=n {
                for iaa in 0..=n {
                    for icr in 0..=(n - iaa) {
                        let alloc = Alloc {
                            alpha: ia as f64 / n as f64,
                            alpha_aa: iaa as f64 / n as f64,
                            alpha_cr: icr as f64 / n as f64,
                            alpha_bb: 1.0 - (iaa + icr) as f64 / n as f64,
                        };
                        let v = extended_average_rate(&c, &alloc);
                        if v > best.0 {
                            best = (v, alloc.alpha_bb);
                        }
                    }
                }
            }
            assert!(best.1.abs() < 1e-12, "argmax alpha_bb = {} > 0", best.1);
        }
    }
}
