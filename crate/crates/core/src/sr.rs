//! Minimum expected distortion for successive-refinement source coding
//! over the broadcast approach: continuous layering solution and a
//! discrete M-state solver.
//!
//! The cumulative-rate exponential I(s) = exp(2 R(s)) is the working
//! variable; the reconstruction distortion at gain s is I(s)^{-b}.

use thiserror::Error;

use crate::fading::{DiscreteStates, FadingLaw};
use crate::numerics::{self, Bracket, NumericsError, Tolerance};

#[derive(Debug, Error, Clone)]
pub enum SrError {
    #[error("f(s) s^2 is increasing on more than one interval; single-interval solution does not apply")]
    MultiInterval,
    #[error("no root found for boundary condition: {0}")]
    NoRoot(String),
    #[error("too many states: {got} > 500")]
    TooManyStates { got: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Source/channel configuration: bandwidth expansion b (channel uses per
/// source sample) and transmit power over the given fading law.
#[derive(Clone)]
pub struct SrConfig {
    pub bandwidth_expansion: f64,
    pub power: f64,
    pub law: FadingLaw,
}

impl SrConfig {
    pub fn new(bandwidth_expansion: f64, power: f64, law: FadingLaw) -> Self {
        assert!(bandwidth_expansion > 0.0 && power > 0.0);
        SrConfig { bandwidth_expansion, power, law }
    }
}

/// Continuous-layering solution: I(s) = (f(s) s^2 / (f(s1) s1^2))^{1/(b+1)}
/// on the allocation interval, 1 below it and constant above.
#[derive(Clone)]
pub struct SrProfile {
    pub s1: f64,
    pub s2: f64,
    law: FadingLaw,
    b: f64,
}

impl SrProfile {
    /// Cumulative-rate exponential exp(2 R(s)).
    pub fn rate_exponential(&self, s: f64) -> f64 {
        if s <= self.s1 {
            return 1.0;
        }
        let at = s.min(self.s2);
        let base = self.law.pdf(at) * at * at
            / (self.law.pdf(self.s1) * self.s1 * self.s1);
        base.powf(1.0 / (self.b + 1.0))
    }

    /// Residual of the power identity ∫ I/s^2 + I(s2)/s2 - 1/s1 - P.
    pub fn power_identity_residual(&self, power: f64) -> f64 {
        let tol = Tolerance { abs_tol: 1e-12, rel_tol: 1e-11, ..Default::default() };
        let integral = numerics::integrate(
            |s| self.rate_exponential(s) / (s * s),
            self.s1,
            self.s2,
            tol,
        )
        .unwrap_or(f64::NAN);
        integral + self.rate_exponential(self.s2) / self.s2 - 1.0 / self.s1 - power
    }
}

/// Expected distortion of a profile: F(s1) + ∫ f I^{-b} + (1-F(s2)) I(s2)^{-b}.
pub fn expected_distortion(profile: &SrProfile, cfg: &SrConfig) -> f64 {
    let b = cfg.bandwidth_expansion;
    let law = &cfg.law;
    if profile.s2 <= profile.s1 {
        return 1.0;
    }
    let tol = Tolerance { abs_tol: 1e-11, rel_tol: 1e-10, ..Default::default() };
    let mid = numerics::integrate(
        |s| law.pdf(s) * profile.rate_exponential(s).powf(-b),
        profile.s1,
        profile.s2,
        tol,
    )
    .unwrap();
    law.cdf(profile.s1) + mid
        + (1.0 - law.cdf(profile.s2)) * profile.rate_exponential(profile.s2).powf(-b)
}

/// Solves the continuous minimum-distortion problem.
///
/// The upper boundary solves 1 - F(s2) = f(s2) s2; the lower boundary is
/// pinned by the power identity. Requires f(s) s^2 to be increasing on a
/// single interval starting at the support edge.
pub fn continuous_min_distortion(cfg: &SrConfig) -> Result<(SrProfile, f64), SrError> {
    let law = &cfg.law;
    let b = cfg.bandwidth_expansion;
    let hi = law.quantile(1.0 - 1e-12).max(4.0 * law.mean());

    // Positive-slope set of f(s) s^2: slope sign equals that of 2 f + s f'.
    let slope_sign = |s: f64| 2.0 * law.pdf(s) + s * law.pdf_deriv(s);
    let n = 2000;
    let mut transitions = 0;
    let mut prev = slope_sign(hi * 1e-6) > 0.0;
    if !prev {
        return Err(SrError::MultiInterval);
    }
    for i in 1..=n {
        let s = hi * i as f64 / n as f64;
        let cur = slope_sign(s) > 0.0;
        if cur != prev {
            transitions += 1;
            prev = cur;
        }
    }
    if transitions > 1 {
        return Err(SrError::MultiInterval);
    }

    // Upper boundary: 1 - F(s2) - f(s2) s2 = 0.
    let g = |s: f64| 1.0 - law.cdf(s) - law.pdf(s) * s;
    let mut bracket = None;
    let mut prev_pt = (hi * 1e-6, g(hi * 1e-6));
    for i in 1..=n {
        let s = hi * i as f64 / n as f64;
        let v = g(s);
        if prev_pt.1.signum() != v.signum() {
            bracket = Some((prev_pt.0, s));
            break;
        }
        prev_pt = (s, v);
    }
    let (bl, bh) = bracket.ok_or_else(|| SrError::NoRoot("upper boundary".into()))?;
    let s2 = numerics::find_root(
        g,
        Bracket::new(bl, bh),
        Tolerance { abs_tol: 1e-13, ..Default::default() },
    )?;

    // Lower boundary from the power identity, scanned on a log grid.
    let residual = |s1: f64| {
        let trial = SrProfile { s1, s2, law: law.clone(), b };
        trial.power_identity_residual(cfg.power)
    };
    let mut lo = s2 * 0.999999;
    let mut flo = residual(lo);
    let mut found = None;
    for _ in 0..200 {
        let next = lo * 0.85;
        let fnext = residual(next);
        if flo.signum() != fnext.signum() {
            found = Some((next, lo));
            break;
        }
        lo = next;
        flo = fnext;
        if lo < 1e-12 {
            break;
        }
    }
    let (rl, rh) = found.ok_or_else(|| SrError::NoRoot("power identity".into()))?;
    let s1 = numerics::find_root(
        residual,
        Bracket::new(rl, rh),
        Tolerance { abs_tol: 1e-13, ..Default::default() },
    )?;
    let profile = SrProfile { s1, s2, law: law.clone(), b };
    let d = expected_distortion(&profile, cfg);
    Ok((profile, d))
}

/// Rayleigh-law profile with the upper boundary pinned analytically at
/// the mean gain; the lower boundary still solves the power identity.
pub fn rayleigh_profile(cfg: &SrConfig) -> Result<SrProfile, SrError> {
    let law = &cfg.law;
    let b = cfg.bandwidth_expansion;
    let s2 = law.mean();
    let residual = |s1: f64| {
        let trial = SrProfile { s1, s2, law: law.clone(), b };
        trial.power_identity_residual(cfg.power)
    };
    let mut lo = s2 * 0.999999;
    let mut flo = residual(lo);
    let mut found = None;
    for _ in 0..200 {
        let next = lo * 0.85;
        let fnext = residual(next);
        if flo.signum() != fnext.signum() {
            found = Some((next, lo));
            break;
        }
        lo = next;
        flo = fnext;
        if lo < 1e-12 {
            break;
        }
    }
    let (rl, rh) = found.ok_or_else(|| SrError::NoRoot("power identity".into()))?;
    let s1 = numerics::find_root(
        residual,
        Bracket::new(rl, rh),
        Tolerance { abs_tol: 1e-13, ..Default::default() },
    )?;
    Ok(SrProfile { s1, s2, law: law.clone(), b })
}

/// Best single-layer (outage) distortion: one threshold and full power.
pub fn outage_distortion(cfg: &SrConfig) -> (f64, f64) {
    let law = &cfg.law;
    let b = cfg.bandwidth_expansion;
    let p = cfg.power;
    let hi = law.quantile(1.0 - 1e-9);
    let (s_th, neg) = numerics::maximize_scalar(
        |s| {
            -(law.cdf(s) + (1.0 - law.cdf(s)) * (1.0 + s * p).powf(-b))
        },
        law.support().0.max(1e-9),
        hi,
        Tolerance::default(),
    );
    (s_th, -neg)
}

/// Discrete M-state minimum distortion by projected coordinate descent on
/// the residual-power variables, with deterministic multi-start.
pub fn discrete_min_distortion(
    states: &DiscreteStates,
    bandwidth_expansion: f64,
    power: f64,
) -> Result<(Vec<f64>, f64), SrError> {
    let m = states.len();
    if m > 500 {
        return Err(SrError::TooManyStates { got: m });
    }
    let s = states.levels();
    let p = states.probs();
    let b = bandwidth_expansion;

    // Residual power above each layer: u[k] = sum_{j >= k} power_j with
    // u[0] fixed at the full budget (more power on the base layer is
    // always at least as good) and u[m] = 0.
    let objective = |u: &[f64]| -> f64 {
        let mut obj = 0.0;
        let mut prod = 1.0;
        for i in 0..m {
            let upper = if i + 1 < m { u[i + 1] } else { 0.0 };
            let factor = (1.0 / s[i] + u[i]) / (1.0 / s[i] + upper);
            prod *= factor.powf(-b);
            obj += p[i] * prod;
        }
        obj
    };

    let starts: Vec<Vec<f64>> = vec![
        // Linear decay.
        (0..m).map(|k| power * (1.0 - k as f64 / m as f64)).collect(),
        // Everything on the top layer.
        (0..m).map(|_| power).collect(),
        // Everything on the base layer.
        (0..m).map(|k| if k == 0 { power } else { 0.0 }).collect(),
        // Quadratic decay.
        (0..m).map(|k| power * (1.0 - k as f64 / m as f64).powi(2)).collect(),
    ];

    let mut best_u: Vec<f64> = Vec::new();
    let mut best_obj = f64::INFINITY;
    for start in starts {
        let mut u = start;
        u[0] = power;
        let mut last = objective(&u);
        for _sweep in 0..400 {
            for k in 1..m {
                let lo = if k + 1 < m { u[k + 1] } else { 0.0 };
                let hi = u[k - 1];
                if hi - lo < 1e-15 {
                    u[k] = lo;
                    continue;
                }
                // Suffix weights independent of u[k]: S = sum_{i>=k} p_i *
                // prod_{k<j<=i} factor_j^{-b}; factors j != k-1, k fixed.
                let mut suffix = 0.0;
                let mut prod = 1.0;
                for i in k..m {
                    if i > k {
                        let upper = if i + 1 < m { u[i + 1] } else { 0.0 };
                        let factor = (1.0 / s[i] + u[i]) / (1.0 / s[i] + upper);
                        prod *= factor.powf(-b);
                    }
                    suffix += p[i] * prod;
                }
                let inv_prev = 1.0 / s[k - 1];
                let inv_cur = 1.0 / s[k];
                let num_prev = inv_prev + u[k - 1];
                let den_cur = inv_cur + if k + 1 < m { u[k + 1] } else { 0.0 };
                let head_weight = p[k - 1];
                let local = |x: f64| -> f64 {
                    let f_prev = (num_prev / (inv_prev + x)).powf(-b);
                    let f_cur = ((inv_cur + x) / den_cur).powf(-b);
                    f_prev * (head_weight + f_cur * suffix)
                };
                let (x, _) = numerics::maximize_scalar(
                    |x| -local(x),
                    lo,
                    hi,
                    Tolerance { abs_tol: 1e-13, rel_tol: 1e-13, max_iter: 120 },
                );
                u[k] = x;
            }
            let cur = objective(&u);
            if (last - cur).abs() < 1e-13 * (1.0 + cur.abs()) {
                break;
            }
            last = cur;
        }
        let cur = objective(&u);
        if cur < best_obj {
            best_obj = cur;
            best_u = u;
        }
    }

    let mut powers = vec![0.0; m];
    for k in 0..m {
        let upper = if k + 1 < m { best_u[k + 1] } else { 0.0 };
        powers[k] = (best_u[k] - upper).max(0.0);
    }
    Ok((powers, best_obj))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(b: f64, p: f64) -> SrConfig {
        SrConfig::new(b, p, FadingLaw::rayleigh(1.0).unwrap())
    }

    #[test]
    fn rayleigh_upper_boundary_is_mean() {
        for &mean in &[0.5, 1.0, 2.0] {
            let c = SrConfig::new(1.0, 10.0, FadingLaw::rayleigh(mean).unwrap());
            let (profile, _) = continuous_min_distortion(&c).unwrap();
            assert!((profile.s2 - mean).abs() < 1e-9, "s2 = {} for mean {mean}", profile.s2);
        }
    }

    #[test]
    fn rayleigh_slope_positive_on_single_interval() {
        // d/ds [f s^2] > 0 exactly on (0, 2 mean) for Rayleigh.
        let law = FadingLaw::rayleigh(1.0).unwrap();
        let slope = |s: f64| 2.0 * law.pdf(s) + s * law.pdf_deriv(s);
        assert!(slope(1.9) > 0.0);
        assert!(slope(2.1) < 0.0);
    }

    #[test]
    fn power_identity_residual_small() {
        let c = cfg(1.0, 10.0);
        let (profile, _) = continuous_min_distortion(&c).unwrap();
        assert!(profile.power_identity_residual(10.0).abs() <= 1e-8);
    }

    #[test]
    fn rate_exponential_shape() {
        let c = cfg(1.0, 10.0);
        let (profile, _) = continuous_min_distortion(&c).unwrap();
        assert_eq!(profile.rate_exponential(profile.s1 * 0.5), 1.0);
        // Continuity at the interval ends and constancy above.
        let at_mean = profile.rate_exponential(1.0);
        assert!((profile.rate_exponential(5.0) - at_mean).abs() < 1e-12);
        // Non-decreasing over a grid.
        let mut prev = 0.0;
        for i in 0..=100 {
            let s = 2.0 * i as f64 / 100.0;
            let v = profile.rate_exponential(s);
            assert!(v + 1e-12 >= prev);
            prev = v;
        }
    }

    #[test]
    fn rayleigh_path_matches_generic_path() {
        for &(b, p) in &[(0.5, 5.0), (1.0, 10.0), (2.0, 50.0)] {
            let c = cfg(b, p);
            let generic = continuous_min_distortion(&c).unwrap().0;
            let direct = rayleigh_profile(&c).unwrap();
            assert!((generic.s1 - direct.s1).abs() < 1e-8);
            assert!((generic.s2 - direct.s2).abs() < 1e-8);
            for k in 0..=40 {
                let s = 0.05 + 2.0 * k as f64 / 40.0;
                let diff = (generic.rate_exponential(s) - direct.rate_exponential(s)).abs();
                assert!(diff < 1e-8, "b={b} P={p} s={s}: {diff}");
            }
        }
    }

    #[test]
    fn trivial_profile_gives_unit_distortion() {
        let c = cfg(1.0, 10.0);
        let profile = SrProfile { s1: 1.0, s2: 1.0, law: c.law.clone(), b: 1.0 };
        assert_eq!(expected_distortion(&profile, &c), 1.0);
    }

    #[test]
    fn distortion_monotone_in_power_and_b() {
        let mut prev = 1.0;
        for &p in &[1.0, 5.0, 10.0, 50.0] {
            let c = cfg(1.0, p);
            let (_, d) = continuous_min_distortion(&c).unwrap();
            assert!(d < prev, "distortion should drop with power");
            prev = d;
        }
        // Larger bandwidth expansion gives lower distortion at fixed P.
        let d_half = continuous_min_distortion(&cfg(0.5, 10.0)).unwrap().1;
        let d_one = continuous_min_distortion(&cfg(1.0, 10.0)).unwrap().1;
        let d_two = continuous_min_distortion(&cfg(2.0, 10.0)).unwrap().1;
        assert!(d_half > d_one && d_one > d_two, "{d_half} {d_one} {d_two}");
    }

    #[test]
    fn large_b_limit_approaches_unity() {
        let c = cfg(500.0, 10.0);
        let (profile, _) = continuous_min_distortion(&c).unwrap();
        // Exponent 1/(b+1) crushes the rate exponential towards 1.
        assert!((profile.rate_exponential(0.9) - 1.0).abs() < 0.05);
    }

    #[test]
    fn broadcast_beats_outage() {
        for &b in &[0.5, 1.0, 2.0] {
            for &p in &[1.0, 10.0, 100.0] {
                let c = cfg(b, p);
                let (_, d_bs) = continuous_min_distortion(&c).unwrap();
                let (_, d_out) = outage_distortion(&c);
                assert!(d_bs <= d_out + 1e-9, "b={b} P={p}: {d_bs} > {d_out}");
            }
        }
    }

    #[test]
    fn discrete_single_state_closed_form() {
        // One state: all power on it, distortion p1 (1 + s1 P)^{-b}.
        let states = DiscreteStates::point_mass(2.0).unwrap();
        let (powers, d) = discrete_min_distortion(&states, 1.0, 10.0).unwrap();
        assert!((powers[0] - 10.0).abs() < 1e-9);
        assert!((d - (1.0 + 2.0 * 10.0f64).powi(-1)).abs() < 1e-9);
    }

    #[test]
    fn discrete_mass_concentration() {
        // Nearly all probability mass on the top state: allocate there.
        let states = DiscreteStates::new(vec![0.5, 2.0], vec![1e-9, 1.0 - 1e-9]).unwrap();
        let (powers, _) = discrete_min_distortion(&states, 1.0, 10.0).unwrap();
        assert!(powers[1] > 9.9, "top-layer power {}", powers[1]);
    }

    #[test]
    fn discrete_converges_to_continuous() {
        // Cell levels sit at the left edges: a state can only decode
        // layers designed at or below its own gain, so midpoint levels
        // would overstate decodability and undercut the continuum optimum.
        let c = cfg(1.0, 10.0);
        let (_, d_cont) = continuous_min_distortion(&c).unwrap();
        for (m, tol) in [(50usize, 0.03), (200, 0.01)] {
            let states = DiscreteStates::discretize_left_edges(&c.law, m, 6.0);
            let (_, d_disc) = discrete_min_distortion(&states, 1.0, 10.0).unwrap();
            assert!(
                (d_disc - d_cont).abs() / d_cont < tol,
                "M={m}: {d_disc} vs {d_cont}"
            );
        }
    }

    #[test]
    fn discrete_solver_matches_brute_force_small() {
        // M = 2: scan the single free power.
        let s = vec![0.5, 1.0];
        let p = vec![0.5, 0.5];
        let states = DiscreteStates::new(s.clone(), p.clone()).unwrap();
        let (_, d_cd) = discrete_min_distortion(&states, 1.0, 10.0).unwrap();
        let direct = |p1: f64| -> f64 {
            let f1 = (1.0 + p1 / (1.0 / 0.5 + (10.0 - p1))).powi(-1);
            let f2 = (1.0 + (10.0 - p1)).powi(-1);
            0.5 * f1 + 0.5 * f1 * f2
        };
        let mut best = f64::INFINITY;
        for i in 0..=4000 {
            best = best.min(direct(10.0 * i as f64 / 4000.0));
        }
        assert!((d_cd - best).abs() < 1e-6, "{d_cd} vs {best}");

        // M = 3 with uneven probabilities: 2-D grid with refinement.
        let s = vec![0.3, 0.8, 1.5];
        let p = vec![0.3, 0.4, 0.3];
        let states = DiscreteStates::new(s.clone(), p.clone()).unwrap();
        let (_, d_cd) = discrete_min_distortion(&states, 1.0, 10.0).unwrap();
        let obj = |p1: f64, p2: f64| -> f64 {
            let powers = [p1, p2, 10.0 - p1 - p2];
            let mut d = 0.0;
            for i in 0..3 {
                let mut prod = 1.0;
                for j in 0..=i {
                    let tail: f64 = powers[j + 1..].iter().sum();
                    prod *= (1.0 + powers[j] / (1.0 / s[j] + tail)).powi(-1);
                }
                d += p[i] * prod;
            }
            d
        };
        let mut best = (0.0, 0.0, f64::INFINITY);
        let mut center = (3.3, 3.3);
        let mut span: f64 = 5.0;
        for _ in 0..6 {
            for i in -20..=20 {
                for j in -20..=20 {
                    let a = (center.0 + span * i as f64 / 20.0).clamp(0.0, 10.0);
                    let b = (center.1 + span * j as f64 / 20.0).clamp(0.0, 10.0 - a);
                    let v = obj(a, b);
                    if v < best.2 {
                        best = (a, b, v);
                    }
                }
            }
            center = (best.0, best.1);
            span /= 5.0;
        }
        assert!((d_cd - best.2).abs() < 1e-6, "{d_cd} vs {}", best.2);
    }

    #[test]
    fn too_many_states_rejected() {
        let m = 501;
        let levels: Vec<f64> = (1..=m).map(|i| i as f64).collect();
        let probs = vec![1.0 / m as f64; m];
        let states = DiscreteStates::new(levels, probs).unwrap();
        assert!(matches!(
            discrete_min_distortion(&states, 1.0, 10.0),
            Err(SrError::TooManyStates { .. })
        ));
    }
}
