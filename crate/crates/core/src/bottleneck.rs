//! Fading channel feeding a limited-capacity reliable link: oblivious
//! compression and decode-forward baselines, the capacity-constrained
//! broadcast optimization, and the random-capacity variant.
//!
//! Rates follow the real-channel half-log convention of this setting.

use thiserror::Error;

use crate::fading::FadingLaw;
use crate::numerics::{self, Bracket, Tolerance};
use crate::siso::{self, LayeringProfile};

#[derive(Debug, Error, Clone)]
pub enum BottleneckError {
    #[error("invalid capacity model: {0}")]
    InvalidCapacity(String),
    #[error("no solution bracket for the constrained breakpoints")]
    NoBracket,
    #[error(transparent)]
    Siso(#[from] siso::SisoError),
}

/// Reliable-link capacity: fixed, or a finite random set known by
/// distribution at the transmitter.
#[derive(Debug, Clone)]
pub enum CapacityModel {
    Fixed(f64),
    Discrete { levels: Vec<f64>, probs: Vec<f64> },
}

impl CapacityModel {
    fn validate(&self) -> Result<(), BottleneckError> {
        match self {
            CapacityModel::Fixed(c) => {
                if !(*c > 0.0) {
                    return Err(BottleneckError::InvalidCapacity(format!("capacity {c}")));
                }
            }
            CapacityModel::Discrete { levels, probs } => {
                if levels.is_empty()
                    || levels.len() != probs.len()
                    || levels.windows(2).any(|w| w[0] > w[1])
                    || levels[0] <= 0.0
                    || probs.iter().any(|&p| p < 0.0)
                    || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12
                {
                    return Err(BottleneckError::InvalidCapacity(
                        "levels must be ascending positive with a valid distribution".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone)]
pub struct BottleneckConfig {
    pub capacity: CapacityModel,
    pub power: f64,
    pub law: FadingLaw,
}

impl BottleneckConfig {
    pub fn new(capacity: CapacityModel, power: f64, law: FadingLaw) -> Result<Self, BottleneckError> {
        capacity.validate()?;
        assert!(power > 0.0);
        Ok(BottleneckConfig { capacity, power, law })
    }

    pub fn fixed(c: f64, power: f64, law: FadingLaw) -> Result<Self, BottleneckError> {
        Self::new(CapacityModel::Fixed(c), power, law)
    }
}

/// Equivalent fading gain of the compressed hop:
/// s (1 - e^{-2C}) / (1 + s P e^{-2C}).
pub fn fpr_eq(s: f64, power: f64, capacity: f64) -> f64 {
    let e = (-2.0 * capacity).exp();
    s * (1.0 - e) / (1.0 + s * power * e)
}

/// Largest equivalent gain, reached as s grows: (e^{2C} - 1)/P.
pub fn fpr_eq_limit(power: f64, capacity: f64) -> f64 {
    ((2.0 * capacity).exp() - 1.0) / power
}

/// Ergodic rate of the oblivious relay: E[1/2 ln(1 + P fpr_eq(s))].
pub fn oblivious_ergodic(cfg: &BottleneckConfig) -> f64 {
    let c = match cfg.capacity {
        CapacityModel::Fixed(c) => c,
        CapacityModel::Discrete { .. } => {
            return average_over_capacity(cfg, |c_fixed| {
                oblivious_ergodic(
                    &BottleneckConfig::fixed(c_fixed, cfg.power, cfg.law.clone()).unwrap(),
                )
            })
        }
    };
    let tol = Tolerance { abs_tol: 1e-11, rel_tol: 1e-10, ..Default::default() };
    let (lo, hi) = cfg.law.support();
    numerics::integrate(
        |s| cfg.law.pdf(s) * 0.5 * (1.0 + cfg.power * fpr_eq(s, cfg.power, c)).ln(),
        lo,
        hi,
        tol,
    )
    .unwrap()
}

/// Ergodic rate of the decode-forward relay: E[min(C, 1/2 ln(1 + sP))].
pub fn df_ergodic(cfg: &BottleneckConfig) -> f64 {
    let c = match cfg.capacity {
        CapacityModel::Fixed(c) => c,
        CapacityModel::Discrete { .. } => {
            return average_over_capacity(cfg, |c_fixed| {
                df_ergodic(&BottleneckConfig::fixed(c_fixed, cfg.power, cfg.law.clone()).unwrap())
            })
        }
    };
    let tol = Tolerance { abs_tol: 1e-11, rel_tol: 1e-10, ..Default::default() };
    let (lo, hi) = cfg.law.support();
    numerics::integrate(
        |s| cfg.law.pdf(s) * c.min(0.5 * (1.0 + s * cfg.power).ln()),
        lo,
        hi,
        tol,
    )
    .unwrap()
}

fn average_over_capacity(cfg: &BottleneckConfig, f: impl Fn(f64) -> f64) -> f64 {
    match &cfg.capacity {
        CapacityModel::Fixed(c) => f(*c),
        CapacityModel::Discrete { levels, probs } => {
            levels.iter().zip(probs).map(|(&c, &p)| p * f(c)).sum()
        }
    }
}

/// Fading law of the equivalent gain under a fixed-capacity oblivious
/// relay, by the analytic inverse of the gain map.
pub fn oblivious_equivalent_law(law: &FadingLaw, power: f64, capacity: f64) -> FadingLaw {
    let e = (-2.0 * capacity).exp();
    let limit = fpr_eq_limit(power, capacity);
    let inner = law.clone();
    let inner_pdf = law.clone();
    let inner_dpdf = law.clone();
    // Inverse map and its derivatives.
    let inv = move |u: f64| u / (1.0 - (1.0 + power * u) * e);
    let inv2 = inv;
    let inv3 = inv;
    let d_inv = move |u: f64| {
        let den = 1.0 - (1.0 + power * u) * e;
        (1.0 - e) / (den * den)
    };
    let d_inv2 = d_inv;
    let dd_inv = move |u: f64| {
        let den = 1.0 - (1.0 + power * u) * e;
        2.0 * power * e * (1.0 - e) / (den * den * den)
    };
    let tol = Tolerance { abs_tol: 1e-10, rel_tol: 1e-9, ..Default::default() };
    let mean = numerics::integrate(
        {
            let law = law.clone();
            move |u: f64| {
                if u >= limit {
                    return 0.0;
                }
                u * law.pdf(inv(u)) * d_inv(u)
            }
        },
        0.0,
        limit,
        tol,
    )
    .unwrap_or(limit / 2.0);
    FadingLaw::from_fns(
        format!("bottleneck_equivalent(C={capacity}, P={power})"),
        move |u| {
            if u <= 0.0 {
                0.0
            } else if u >= limit {
                1.0
            } else {
                inner.cdf(inv2(u))
            }
        },
        move |u| {
            if u <= 0.0 || u >= limit {
                0.0
            } else {
                inner_pdf.pdf(inv3(u)) * d_inv2(u)
            }
        },
        Some(std::sync::Arc::new(move |u: f64| {
            if u <= 0.0 || u >= limit {
                0.0
            } else {
                let s = inv(u);
                inner_dpdf.pdf_deriv(s) * d_inv(u) * d_inv(u) + inner_dpdf.pdf(s) * dd_inv(u)
            }
        })),
        (0.0, limit),
        mean,
    )
}

/// Oblivious broadcast: optimal layering over the equivalent law.
pub fn oblivious_broadcast(
    cfg: &BottleneckConfig,
) -> Result<(LayeringProfile, f64), BottleneckError> {
    let c = match cfg.capacity {
        CapacityModel::Fixed(c) => c,
        CapacityModel::Discrete { .. } => {
            return Err(BottleneckError::InvalidCapacity(
                "use variable_capacity_broadcast for random capacity".into(),
            ))
        }
    };
    let law = oblivious_equivalent_law(&cfg.law, cfg.power, c);
    let profile = siso::optimal_profile(&law, cfg.power)?;
    let rate = 0.5 * siso::expected_rate(&profile, &law);
    Ok((profile, rate))
}

/// Capacity-constrained layering over the direct fading law.
///
/// `lambda` is the nonnegative multiplier of the rate cap; the shifted
/// candidate interference subtracts it: (1 - F - lambda - u f)/(u^2 f).
#[derive(Debug, Clone, Copy)]
pub struct ConstrainedProfile {
    pub lambda: f64,
    pub u0: f64,
    pub u1: f64,
    /// Number of (u0, u1) solutions found while scanning; more than one
    /// means the coupled boundary relation is not unique for this law.
    pub solution_count: usize,
}

impl ConstrainedProfile {
    pub fn interference(&self, law: &FadingLaw, u: f64) -> f64 {
        if u <= self.u0 || u >= self.u1 {
            return if u <= self.u0 { self.candidate(law, self.u0) } else { 0.0 };
        }
        self.candidate(law, u)
    }

    fn candidate(&self, law: &FadingLaw, u: f64) -> f64 {
        (1.0 - law.cdf(u) - self.lambda - u * law.pdf(u)) / (u * u * law.pdf(u))
    }

    /// Total layered rate 1/2 ln(u1^2 f(u1) / (u0^2 f(u0))).
    pub fn total_rate(&self, law: &FadingLaw) -> f64 {
        0.5 * (self.u1 * self.u1 * law.pdf(self.u1) / (self.u0 * self.u0 * law.pdf(self.u0)))
            .ln()
    }
}

/// Decode-forward broadcast under the bottleneck rate cap: unconstrained
/// single-user layering when the cap is slack, otherwise the shifted
/// profile whose total rate meets the cap exactly.
pub fn nonoblivious_broadcast(
    cfg: &BottleneckConfig,
) -> Result<(ConstrainedProfile, f64), BottleneckError> {
    let c = match cfg.capacity {
        CapacityModel::Fixed(c) => c,
        CapacityModel::Discrete { .. } => {
            return Err(BottleneckError::InvalidCapacity(
                "constrained layering expects a fixed capacity".into(),
            ))
        }
    };
    let law = &cfg.law;
    let p = cfg.power;
    let unconstrained = siso::optimal_profile(law, p)?;
    let total_unconstrained =
        0.5 * (unconstrained.s1 * unconstrained.s1 * law.pdf(unconstrained.s1)
            / (unconstrained.s0 * unconstrained.s0 * law.pdf(unconstrained.s0)))
            .ln();
    if total_unconstrained <= c {
        let profile = ConstrainedProfile {
            lambda: 0.0,
            u0: unconstrained.s0,
            u1: unconstrained.s1,
            solution_count: 1,
        };
        let rate = 0.5 * siso::expected_rate(&unconstrained, law);
        return Ok((profile, rate));
    }

    // Active cap: the layering interval shrinks until the total layered
    // rate meets the cap. Scan u1 in (0, s1] for roots of the coupled
    // relation u1^2 f(u1) = e^{2C} u0^2 f(u0), with the multiplier pinned
    // by I(u1) = 0: lambda(u1) = 1 - F(u1) - u1 f(u1) >= 0, and u0 by
    // I(u0) = P.
    let residual = |u1: f64| -> Option<f64> {
        let lambda = 1.0 - law.cdf(u1) - u1 * law.pdf(u1);
        if lambda < 0.0 {
            return None;
        }
        let cand =
            |u: f64| (1.0 - law.cdf(u) - lambda - u * law.pdf(u)) / (u * u * law.pdf(u));
        let (mut lo, mut hi2) = (u1 * 1e-9, u1);
        if cand(lo) <= p {
            return None;
        }
        for _ in 0..200 {
            let m = 0.5 * (lo + hi2);
            if cand(m) > p {
                lo = m;
            } else {
                hi2 = m;
            }
        }
        let u0 = 0.5 * (lo + hi2);
        Some(u1 * u1 * law.pdf(u1) - (2.0 * c).exp() * u0 * u0 * law.pdf(u0))
    };

    let n = 6000;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let start = unconstrained.s1 * 1e-6;
    for i in 0..=n {
        let u1 = start + (unconstrained.s1 - start) * i as f64 / n as f64;
        if let Some(r) = residual(u1) {
            if let Some((pu, pr)) = prev {
                if pr.signum() != r.signum() {
                    if let Ok(root) = numerics::find_root(
                        |x| residual(x).unwrap_or(f64::MAX),
                        Bracket::new(pu, u1),
                        Tolerance { abs_tol: 1e-13, ..Default::default() },
                    ) {
                        roots.push(root);
                    }
                }
            }
            prev = Some((u1, r));
        }
    }
    let u1 = *roots.first().ok_or(BottleneckError::NoBracket)?;
    let lambda = 1.0 - law.cdf(u1) - u1 * law.pdf(u1);
    let mut profile = ConstrainedProfile { lambda, u0: 0.0, u1, solution_count: roots.len() };
    // Recover u0 at the root.
    let (mut lo, mut hi2) = (u1 * 1e-9, u1);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi2);
        if profile.candidate(law, m) > p {
            lo = m;
        } else {
            hi2 = m;
        }
    }
    profile.u0 = 0.5 * (lo + hi2);

    // Expected rate: 1/2 ∫ (1 - F) u rho / (1 + u I) with the shifted
    // closed form 1 + u I = (1 - F - lambda)/(u f).
    let tol = Tolerance { abs_tol: 1e-11, rel_tol: 1e-10, ..Default::default() };
    let rate = 0.5
        * numerics::integrate(
            |u| {
                let f = law.pdf(u);
                let df = law.pdf_deriv(u);
                let numer = 1.0 - law.cdf(u) - lambda - u * f;
                let dnumer = -2.0 * f - u * df;
                let denom = u * u * f;
                let ddenom = 2.0 * u * f + u * u * df;
                let rho = -(dnumer * denom - numer * ddenom) / (denom * denom);
                let one_plus = (1.0 - law.cdf(u) - lambda) / (u * f);
                (1.0 - law.cdf(u)) * u * rho / one_plus
            },
            profile.u0,
            profile.u1,
            tol,
        )
        .unwrap_or(0.0);
    Ok((profile, rate))
}

/// Mixture equivalent-gain law for a random bottleneck capacity.
pub fn variable_capacity_law(cfg: &BottleneckConfig) -> Result<FadingLaw, BottleneckError> {
    let (levels, probs) = match &cfg.capacity {
        CapacityModel::Discrete { levels, probs } => (levels.clone(), probs.clone()),
        CapacityModel::Fixed(c) => (vec![*c], vec![1.0]),
    };
    let p = cfg.power;
    let base = cfg.law.clone();
    let components: Vec<FadingLaw> = levels
        .iter()
        .map(|&c| oblivious_equivalent_law(&base, p, c))
        .collect();
    let limit = fpr_eq_limit(p, *levels.last().unwrap());
    let comp_cdf = components.clone();
    let probs_cdf = probs.clone();
    let comp_pdf = components.clone();
    let probs_pdf = probs.clone();
    let comp_dpdf = components.clone();
    let probs_dpdf = probs.clone();
    let mean: f64 = components.iter().zip(&probs).map(|(l, &w)| w * l.mean()).sum();
    Ok(FadingLaw::from_fns(
        format!("bottleneck_mixture(P={p})"),
        move |u| comp_cdf.iter().zip(&probs_cdf).map(|(l, &w)| w * l.cdf(u)).sum(),
        move |u| comp_pdf.iter().zip(&probs_pdf).map(|(l, &w)| w * l.pdf(u)).sum(),
        Some(std::sync::Arc::new(move |u: f64| {
            comp_dpdf.iter().zip(&probs_dpdf).map(|(l, &w)| w * l.pdf_deriv(u)).sum()
        })),
        (0.0, limit),
        mean,
    ))
}

/// Broadcast over the random-capacity bottleneck: profile over the
/// mixture law, its expected rate, and the cumulative rate curve
/// R_opt(s) = ln(s/x0) + (1/2) ln(f(s)/f(x0)) within the allocation.
pub fn variable_capacity_broadcast(
    cfg: &BottleneckConfig,
) -> Result<(LayeringProfile, f64, impl Fn(f64) -> f64), BottleneckError> {
    let law = variable_capacity_law(cfg)?;
    let profile = siso::optimal_profile(&law, cfg.power)?;
    let rate = 0.5 * siso::expected_rate(&profile, &law);
    let law2 = law.clone();
    let (x0, x1) = (profile.s0, profile.s1);
    let curve = move |s: f64| -> f64 {
        if s <= x0 {
            0.0
        } else {
            let at = s.min(x1);
            (at / x0).ln() + 0.5 * (law2.pdf(at) / law2.pdf(x0)).ln()
        }
    };
    Ok((profile, rate, curve))
}
