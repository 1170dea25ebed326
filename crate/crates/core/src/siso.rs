//! Single-user broadcast approach: optimal continuum layering, cumulative
//! and expected rates, outage and ergodic baselines, finite-level layering.
//!
//! Rates in this module are natural-log (nats per channel use).

use thiserror::Error;

use crate::fading::{DiscreteStates, FadingLaw};
use crate::numerics::{self, Bracket, NumericsError, Tolerance};

#[derive(Debug, Error, Clone)]
pub enum SisoError {
    #[error("candidate residual interference is positive on more than one interval; single-interval construction does not apply")]
    MultiInterval,
    #[error("law is degenerate over the scanned range; use the outage path instead")]
    DegenerateLaw,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Residual-interference profile of the optimal continuum layering.
///
/// `I(s) = P` below `s0`, the Euler-equation candidate on `[s0, s1]`,
/// and zero above; `rho = -dI/ds` is the per-layer power density.
#[derive(Debug, Clone)]
pub struct LayeringProfile {
    law: FadingLaw,
    pub power: f64,
    pub s0: f64,
    pub s1: f64,
}

impl LayeringProfile {
    /// Interference power seen while decoding the layer indexed by `s`.
    pub fn residual_interference(&self, s: f64) -> f64 {
        if s <= self.s0 {
            self.power
        } else if s >= self.s1 {
            0.0
        } else {
            candidate_interference(&self.law, s).clamp(0.0, self.power)
        }
    }

    /// Layering power density rho(s) = -I'(s); zero outside (s0, s1).
    pub fn power_density(&self, s: f64) -> f64 {
        if s <= self.s0 || s >= self.s1 {
            0.0
        } else {
            (-candidate_interference_deriv(&self.law, s)).max(0.0)
        }
    }

    pub fn law(&self) -> &FadingLaw {
        &self.law
    }
}

/// Best single-layer operating point: threshold gain and its expected rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageSolution {
    pub s_th: f64,
    pub rate: f64,
}

/// Euler-equation candidate (1 - F(x) - x f(x)) / (x^2 f(x)).
fn candidate_interference(law: &FadingLaw, x: f64) -> f64 {
    let f = law.pdf(x);
    (1.0 - law.cdf(x) - x * f) / (x * x * f)
}

fn candidate_interference_deriv(law: &FadingLaw, x: f64) -> f64 {
    let f = law.pdf(x);
    let df = law.pdf_deriv(x);
    let numer = 1.0 - law.cdf(x) - x * f;
    let dnumer = -2.0 * f - x * df;
    let denom = x * x * f;
    let ddenom = 2.0 * x * f + x * x * df;
    (dnumer * denom - numer * ddenom) / (denom * denom)
}

/// Optimal continuum layering for `law` at total power `P`.
///
/// The candidate interference is scanned over the support for its positive
/// set; a single interval is required. `s1` solves `I(s1) = 0` and `s0`
/// solves `I(s0) = P`, both by bracketed root finding.
pub fn optimal_profile(law: &FadingLaw, power: f64) -> Result<LayeringProfile, SisoError> {
    assert!(power > 0.0, "power must be positive");
    let (lo_support, _) = law.support();
    let hi = law.quantile(1.0 - 1e-12).max(law.mean() * 4.0);
    let lo = (lo_support.max(1e-12)).min(hi / 2.0);

    // Positive set of g(x) = 1 - F(x) - x f(x) determines where layering
    // power can live; the construction requires it to be one interval.
    let n = 4000usize;
    let g = |x: f64| 1.0 - law.cdf(x) - x * law.pdf(x);
    let mut crossings = Vec::new();
    let mut prev_x = lo;
    let mut prev_g = g(prev_x);
    let mut any_positive = prev_g > 0.0;
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let gx = g(x);
        if gx > 0.0 {
            any_positive = true;
        }
        if prev_g > 0.0 && gx <= 0.0 || prev_g <= 0.0 && gx > 0.0 {
            crossings.push((prev_x, x));
        }
        prev_x = x;
        prev_g = gx;
    }
    if !any_positive || law.pdf(0.5 * (lo + hi)) == 0.0 && law.pdf(lo) == 0.0 {
        return Err(SisoError::DegenerateLaw);
    }
    // Expect the positive set to be a single left interval: exactly one
    // downward crossing (g starts positive near the support edge for laws
    // with f(0) > 0) or an up crossing followed by a down crossing.
    let down: Vec<&(f64, f64)> =
        crossings.iter().filter(|(a, _)| g(*a) > 0.0).collect();
    if down.len() != 1 {
        return Err(SisoError::MultiInterval);
    }
    let (bra, brb) = *down[0];
    let s1 = numerics::find_root(g, Bracket::new(bra, brb), Tolerance::default())?;

    // Monotonicity of the candidate over its positive interval.
    let interval_lo = if g(lo) > 0.0 {
        lo
    } else {
        let up = crossings.iter().find(|(a, _)| g(*a) <= 0.0);
        match up {
            Some(&(a, b)) => numerics::find_root(g, Bracket::new(a, b), Tolerance::default())?,
            None => lo,
        }
    };
    let mut prev = f64::INFINITY;
    for i in 1..200 {
        let x = interval_lo + (s1 - interval_lo) * i as f64 / 200.0;
        let v = candidate_interference(law, x);
        if v > prev * (1.0 + 1e-6) + 1e-9 {
            return Err(SisoError::MultiInterval);
        }
        prev = v;
    }

    // s0: first crossing of the candidate with P, scanning down from s1.
    let mut bracket_lo = interval_lo;
    let cand_lo = candidate_interference(law, bracket_lo);
    if cand_lo <= power {
        // Candidate never reaches P: all power fits, clamp at interval edge.
        let s0 = interval_lo;
        return Ok(LayeringProfile { law: law.clone(), power, s0, s1 });
    }
    let mut bracket_hi = s1;
    // Shrink the bracket so the root finder sees a sign change.
    for _ in 0..200 {
        let mid = 0.5 * (bracket_lo + bracket_hi);
        if candidate_interference(law, mid) > power {
            bracket_lo = mid;
        } else {
            bracket_hi = mid;
        }
        if bracket_hi - bracket_lo < 1e-13 * (1.0 + bracket_hi) {
            break;
        }
    }
    let s0 = 0.5 * (bracket_lo + bracket_hi);
    Ok(LayeringProfile { law: law.clone(), power, s0, s1 })
}

/// Total decodable rate R(s) for a fading realization `s`:
/// ∫_0^s u rho(u) / (1 + u I(u)) du.
pub fn cumulative_rate(profile: &LayeringProfile, s: f64) -> f64 {
    if s <= profile.s0 {
        return 0.0;
    }
    let upper = s.min(profile.s1);
    let tol = Tolerance { abs_tol: 1e-11, rel_tol: 1e-10, ..Default::default() };
    numerics::integrate(
        |u| {
            let i = profile.residual_interference(u);
            u * profile.power_density(u) / (1.0 + u * i)
        },
        profile.s0,
        upper,
        tol,
    )
    .unwrap_or(0.0)
}

/// Expected rate of the layering over the fading law:
/// ∫ (1 - F(u)) u rho(u) / (1 + u I(u)) du.
pub fn expected_rate(profile: &LayeringProfile, law: &FadingLaw) -> f64 {
    let tol = Tolerance { abs_tol: 1e-11, rel_tol: 1e-10, ..Default::default() };
    numerics::integrate(
        |u| {
            let i = profile.residual_interference(u);
            (1.0 - law.cdf(u)) * u * profile.power_density(u) / (1.0 + u * i)
        },
        profile.s0,
        profile.s1,
        tol,
    )
    .unwrap_or(0.0)
}

/// Expected rate of the Rayleigh(1) optimal profile in closed form:
/// 2 E1(s0) - 2 E1(1) - (e^{-s0} - e^{-1}) with s0 = 2/(1 + sqrt(1+4P)).
pub fn rayleigh_expected_rate(power: f64) -> f64 {
    let s0 = rayleigh_lower_breakpoint(power);
    2.0 * numerics::exp_integral_e1(s0).unwrap() - 2.0 * numerics::exp_integral_e1(1.0).unwrap()
        - ((-s0).exp() - (-1.0f64).exp())
}

/// s0 = 2/(1 + sqrt(1 + 4P)) for the unit-mean Rayleigh law.
pub fn rayleigh_lower_breakpoint(power: f64) -> f64 {
    2.0 / (1.0 + (1.0 + 4.0 * power).sqrt())
}

/// Best single-layer threshold and rate: maximize (1-F(s)) ln(1+sP).
///
/// Unit-mean Rayleigh admits the Lambert-W closed form
/// s_th = (P - W(P)) / (W(P) P), rate = e^{-s_th} ln(P / W(P)).
pub fn outage_capacity(law: &FadingLaw, power: f64) -> OutageSolution {
    if law.name().starts_with("rayleigh") {
        // Scale so the closed form applies: with mean m, substitute s = m t.
        let scaled = law.mean() * power;
        let w = numerics::lambert_w0(scaled).unwrap();
        let t_th = (scaled - w) / (w * scaled);
        let s_th = law.mean() * t_th;
        let rate = (-t_th).exp() * (scaled / w).ln();
        return OutageSolution { s_th, rate };
    }
    let hi = law.quantile(1.0 - 1e-9);
    let (s_th, rate) = numerics::maximize_scalar(
        |s| (1.0 - law.cdf(s)) * (1.0 + s * power).ln(),
        law.support().0,
        hi,
        Tolerance::default(),
    );
    OutageSolution { s_th, rate }
}

/// Outage over a finite-state law: best level by direct enumeration.
pub fn outage_capacity_discrete(states: &DiscreteStates, power: f64) -> OutageSolution {
    let mut best = OutageSolution { s_th: states.levels()[0], rate: f64::NEG_INFINITY };
    for (i, &s) in states.levels().iter().enumerate() {
        let rate = states.tail_prob(i) * (1.0 + s * power).ln();
        if rate > best.rate {
            best = OutageSolution { s_th: s, rate };
        }
    }
    best
}

/// Ergodic capacity E_s[ln(1 + sP)] by quadrature over the law.
pub fn ergodic_capacity(law: &FadingLaw, power: f64) -> f64 {
    let tol = Tolerance { abs_tol: 1e-11, rel_tol: 1e-10, ..Default::default() };
    let (lo, hi) = law.support();
    numerics::integrate(|s| law.pdf(s) * (1.0 + s * power).ln(), lo, hi, tol).unwrap()
}

/// Rayleigh(mean m) ergodic capacity closed form e^{1/(mP)} E1(1/(mP)).
pub fn rayleigh_ergodic_capacity(mean: f64, power: f64) -> f64 {
    let x = 1.0 / (mean * power);
    x.exp() * numerics::exp_integral_e1(x).unwrap()
}

/// Expected rate of K discrete layers at thresholds `s` with power
/// fractions `beta`: layer i decodes at rate
/// ln(1 + s_i β_i P / (1 + s_i P Σ_{j>i} β_j)) with probability 1 - F(s_i).
pub fn finite_layer_expected_rate(
    law: &FadingLaw,
    thresholds: &[f64],
    fractions: &[f64],
    power: f64,
) -> f64 {
    assert_eq!(
        thresholds.len(),
        fractions.len(),
        "thresholds and fractions must have equal length"
    );
    assert!(thresholds.windows(2).all(|w| w[0] < w[1]), "thresholds must ascend");
    let total: f64 = fractions.iter().sum();
    assert!(fractions.iter().all(|&b| b >= 0.0) && (total - 1.0).abs() < 1e-9);
    let mut rate = 0.0;
    let mut above: f64 = 1.0;
    for (i, (&s, &b)) in thresholds.iter().zip(fractions).enumerate() {
        above -= b;
        let layer = (1.0 + s * b * power / (1.0 + s * power * above.max(0.0))).ln();
        rate += (1.0 - law.cdf(thresholds[i])) * layer;
    }
    rate
}
