//! Joint transmission of a delay-constrained (DC) layered stream and a
//! non-delay-constrained (NDC) stream on one channel: achievable rates for
//! a given DC power profile, and the jointly optimal outage-DC and
//! broadcast-DC solutions.

use std::sync::Arc;

use thiserror::Error;

use crate::fading::FadingLaw;
use crate::numerics::{self, Tolerance};
use crate::siso;

#[derive(Debug, Error, Clone)]
pub enum MixedError {
    #[error("DC profile must start at beta*P: I(0) = {got}, expected {expected}")]
    WrongInitialPower { got: f64, expected: f64 },
    #[error("invalid DC power fraction {0}; must lie in [0, 1]")]
    InvalidBeta(f64),
}

/// Configuration for the DC/NDC split.
#[derive(Clone)]
pub struct DcNdcConfig {
    pub beta: f64,
    pub power: f64,
    pub law: FadingLaw,
}

impl DcNdcConfig {
    pub fn new(beta: f64, power: f64, law: FadingLaw) -> Result<Self, MixedError> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(MixedError::InvalidBeta(beta));
        }
        Ok(DcNdcConfig { beta, power, law })
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Residual-interference profile of the DC stream: a flat clamp at
/// `beta * P`, a continuous section, and optional discrete power atoms
/// where the candidate solution jumps across the clamp range.
#[derive(Clone)]
pub struct DcProfile {
    pub beta_power: f64,
    /// Clamp boundary: I = beta*P below this gain.
    pub s_lo: f64,
    /// End of allocation: I = 0 above this gain.
    pub s_hi: f64,
    /// Interior evaluator on (s_lo, s_hi); None for pure outage.
    interior: Option<ScalarFn>,
    /// Whether the interior carries a continuous density -I' (false for
    /// piecewise-constant interiors built purely from atoms).
    has_density: bool,
    /// Dirac power layers as (gain, mass).
    pub atoms: Vec<(f64, f64)>,
}

impl DcProfile {
    /// Single-layer (outage) profile: all DC power in one atom at `s_th`.
    pub fn outage(s_th: f64, beta_power: f64) -> Self {
        DcProfile {
            beta_power,
            s_lo: s_th,
            s_hi: s_th,
            interior: None,
            has_density: false,
            atoms: if beta_power > 0.0 { vec![(s_th, beta_power)] } else { Vec::new() },
        }
    }

    /// Profile with a caller-supplied continuous residual-interference
    /// section on `(s_lo, s_hi)`, clamped at `beta_power` below and zero
    /// above, plus optional discrete layers.
    pub fn piecewise(
        interior: impl Fn(f64) -> f64 + Send + Sync + 'static,
        beta_power: f64,
        s_lo: f64,
        s_hi: f64,
        atoms: Vec<(f64, f64)>,
    ) -> Self {
        DcProfile {
            beta_power,
            s_lo,
            s_hi,
            interior: Some(Arc::new(interior)),
            has_density: true,
            atoms,
        }
    }

    /// Finite-layer profile from (gain, mass) atoms summing to `beta_power`.
    pub fn from_atoms(mut atoms: Vec<(f64, f64)>, beta_power: f64) -> Self {
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        atoms.retain(|&(_, m)| m > 0.0);
        let total: f64 = atoms.iter().map(|&(_, m)| m).sum();
        assert!(
            (total - beta_power).abs() <= 1e-9 * (1.0 + beta_power),
            "atom masses must sum to beta_power"
        );
        let s_lo = atoms.first().map(|&(s, _)| s).unwrap_or(0.0);
        let s_hi = atoms.last().map(|&(s, _)| s).unwrap_or(0.0);
        let step_atoms = atoms.clone();
        let interior: ScalarFn = Arc::new(move |u: f64| {
            step_atoms.iter().filter(|&&(s, _)| s > u).map(|&(_, m)| m).sum()
        });
        DcProfile { beta_power, s_lo, s_hi, interior: Some(interior), has_density: false, atoms }
    }

    /// Residual interference I(u): total DC power in layers above `u`.
    pub fn interference(&self, u: f64) -> f64 {
        if self.beta_power == 0.0 {
            return 0.0;
        }
        if u < self.s_lo {
            return self.beta_power;
        }
        if u >= self.s_hi {
            return 0.0;
        }
        match &self.interior {
            Some(f) => f(u).clamp(0.0, self.beta_power),
            None => self.beta_power,
        }
    }

    /// Continuous layering density -I'(u) inside (s_lo, s_hi), taken on
    /// the clamped interference so saturated or exhausted stretches carry
    /// no phantom power.
    fn density(&self, u: f64) -> f64 {
        match &self.interior {
            Some(f) => {
                let h = 1e-6 * u.abs().max(1e-3);
                let (a, b) = ((u - h).max(self.s_lo), (u + h).min(self.s_hi));
                let fa = f(a).clamp(0.0, self.beta_power);
                let fb = f(b).clamp(0.0, self.beta_power);
                ((fa - fb) / (b - a)).max(0.0)
            }
            None => 0.0,
        }
    }
}

/// Expected DC rate of a profile: continuous layers decode against their
/// own residual plus the whole NDC power, discrete layers contribute
/// finite log increments.
pub fn dc_rate(profile: &DcProfile, cfg: &DcNdcConfig) -> Result<f64, MixedError> {
    let expected = cfg.beta * cfg.power;
    if (profile.beta_power - expected).abs() > 1e-9 * (1.0 + expected) {
        return Err(MixedError::WrongInitialPower { got: profile.beta_power, expected });
    }
    if cfg.beta == 0.0 {
        return Ok(0.0);
    }
    let ndc_power = (1.0 - cfg.beta) * cfg.power;
    let law = &cfg.law;
    let mut rate = 0.0;
    if profile.has_density && profile.interior.is_some() && profile.s_hi > profile.s_lo {
        let tol = Tolerance { abs_tol: 1e-10, rel_tol: 1e-9, ..Default::default() };
        rate += numerics::integrate(
            |u| {
                (1.0 - law.cdf(u)) * u * profile.density(u)
                    / (1.0 + u * profile.interference(u) + ndc_power * u)
            },
            profile.s_lo,
            profile.s_hi,
            tol,
        )
        .unwrap_or(0.0);
    }
    for &(s, mass) in &profile.atoms {
        // Residual above the atom: interference just past the jump.
        let above = profile.interference(s + 1e-12 * (1.0 + s));
        rate += (1.0 - law.cdf(s))
            * (1.0 + s * mass / (1.0 + s * above + ndc_power * s)).ln();
    }
    Ok(rate)
}

/// Expected NDC rate: the NDC codeword sees the undecoded DC layers of
/// each block as interference.
pub fn ndc_rate(profile: &DcProfile, cfg: &DcNdcConfig) -> f64 {
    let ndc_power = (1.0 - cfg.beta) * cfg.power;
    if ndc_power == 0.0 {
        return 0.0;
    }
    let law = &cfg.law;
    let tol = Tolerance { abs_tol: 1e-10, rel_tol: 1e-9, ..Default::default() };
    let (lo, hi) = law.support();
    numerics::integrate(
        |u| {
            law.pdf(u) * (1.0 + ndc_power * u / (1.0 + u * profile.interference(u))).ln()
        },
        lo,
        hi,
        tol,
    )
    .unwrap()
}

/// Jointly optimal single-layer DC solution.
#[derive(Debug, Clone)]
pub struct OutageJoint {
    pub s_th: f64,
    pub dc_rate: f64,
    pub ndc_rate: f64,
    /// True when the stationarity equation had no root in the search range
    /// and a grid optimum was returned instead.
    pub boundary_fallback: bool,
}

/// Optimal outage-DC threshold: stationarity condition
/// f(s) ln(1 + beta P s) = (1 - F(s)) beta P / ((1 + P s)(1 + (1-beta) P s)).
pub fn outage_joint(cfg: &DcNdcConfig) -> OutageJoint {
    let law = &cfg.law;
    let p = cfg.power;
    let beta = cfg.beta;
    if beta == 0.0 {
        return OutageJoint {
            s_th: 0.0,
            dc_rate: 0.0,
            ndc_rate: siso::ergodic_capacity(law, p),
            boundary_fallback: false,
        };
    }
    let h = |s: f64| {
        law.pdf(s) * (1.0 + beta * p * s).ln()
            - (1.0 - law.cdf(s)) * beta * p / ((1.0 + p * s) * (1.0 + (1.0 - beta) * p * s))
    };
    let lo = 1e-6;
    let hi = 20.0 * law.mean();
    // Bracket scan for the stationary point.
    let n = 800;
    let mut root = None;
    let mut prev = (lo, h(lo));
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let hx = h(x);
        if prev.1.signum() != hx.signum() {
            if let Ok(r) =
                numerics::find_root(h, numerics::Bracket::new(prev.0, x), Tolerance::default())
            {
                root = Some(r);
                break;
            }
        }
        prev = (x, hx);
    }
    let (s_th, fallback) = match root {
        Some(r) => (r, false),
        None => {
            // No stationary point: pick the best threshold on a fine grid.
            let mut best = (lo, f64::NEG_INFINITY);
            for i in 0..=2000 {
                let s = lo + (hi - lo) * i as f64 / 2000.0;
                let profile = DcProfile::outage(s, beta * p);
                let total = dc_rate(&profile, cfg).unwrap() + ndc_rate(&profile, cfg);
                if total > best.1 {
                    best = (s, total);
                }
            }
            (best.0, true)
        }
    };
    let profile = DcProfile::outage(s_th, beta * p);
    OutageJoint {
        s_th,
        dc_rate: dc_rate(&profile, cfg).unwrap(),
        ndc_rate: ndc_rate(&profile, cfg),
        boundary_fallback: fallback,
    }
}

/// Euler-equation candidate for the broadcast-DC residual interference,
/// taking the +sqrt root of the quadratic. Returns None where the
/// discriminant is negative (no real solution, zero allocation).
fn broadcast_candidate(law: &FadingLaw, power: f64, beta: f64, x: f64) -> Option<f64> {
    let f = law.pdf(x);
    if f <= 0.0 {
        return None;
    }
    let nbar = (1.0 - beta) * power;
    let a = x * f;
    let b = 2.0 * nbar * f * x * x - (1.0 - law.cdf(x));
    let c = nbar * nbar * f * x * x * x;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let root = if b <= 0.0 {
        (-b + disc.sqrt()) / (2.0 * a)
    } else {
        // Equivalent form that avoids cancellation when b > 0.
        let denom = b + disc.sqrt();
        if denom == 0.0 {
            0.0
        } else {
            2.0 * c / denom
        }
    };
    Some((root - 1.0) / x)
}

/// Jointly optimal broadcast-DC solution.
#[derive(Clone)]
pub struct BroadcastJoint {
    pub profile: DcProfile,
    pub dc_rate: f64,
    pub ndc_rate: f64,
}

/// Continuum-layered DC against a single NDC codeword. The candidate
/// interference is clamped to [0, beta*P]; where its real domain ends
/// before reaching zero the remaining power collapses into a single
/// discrete layer at the boundary.
pub fn broadcast_joint(cfg: &DcNdcConfig) -> Result<BroadcastJoint, MixedError> {
    let law = cfg.law.clone();
    let p = cfg.power;
    let beta = cfg.beta;
    let bp = beta * p;
    if beta == 0.0 {
        let profile = DcProfile {
            beta_power: 0.0,
            s_lo: 0.0,
            s_hi: 0.0,
            interior: None,
            has_density: false,
            atoms: Vec::new(),
        };
        let ndc = ndc_rate(&profile, cfg);
        return Ok(BroadcastJoint { profile, dc_rate: 0.0, ndc_rate: ndc });
    }

    let hi = 20.0 * law.mean();
    let lo = 1e-9;
    // Scan for where the candidate leaves the clamp range or loses its
    // real root. The candidate decreases from +infinity near the origin.
    let n = 8000usize;
    let mut s_lo = None; // candidate crosses beta*P
    let mut s_end = None; // candidate hits 0 or the discriminant dies
    let mut prev_x = lo;
    let mut prev_v = broadcast_candidate(&law, p, beta, lo);
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = broadcast_candidate(&law, p, beta, x);
        match (prev_v, v) {
            (Some(pv), Some(cv)) => {
                if s_lo.is_none() && pv >= bp && cv < bp {
                    s_lo = Some((prev_x, x));
                }
                if s_lo.is_some() && s_end.is_none() && pv > 0.0 && cv <= 0.0 {
                    s_end = Some((prev_x, x, false));
                    break;
                }
            }
            (Some(_), None) => {
                // Discriminant turned negative: allocation stops here.
                s_end = Some((prev_x, x, true));
                break;
            }
            _ => {}
        }
        prev_x = x;
        prev_v = v;
    }

    let law2 = law.clone();
    let cand = move |x: f64| broadcast_candidate(&law2, p, beta, x).unwrap_or(0.0);

    // Pure outage degeneration: the candidate never dips below the clamp
    // before losing its real domain.
    let (clamp_a, clamp_b) = match s_lo {
        Some(ab) => ab,
        None => {
            // The candidate stays above the clamp until its real domain
            // ends: the construction degenerates to a single layer, so
            // place it at the jointly optimal outage threshold.
            let single = outage_joint(cfg);
            let profile = DcProfile::outage(single.s_th, bp);
            return Ok(BroadcastJoint {
                profile,
                dc_rate: single.dc_rate,
                ndc_rate: single.ndc_rate,
            });
        }
    };
    let s_lo_val = numerics::find_root(
        |x| cand(x) - bp,
        numerics::Bracket::new(clamp_a, clamp_b),
        Tolerance::default(),
    )
    .unwrap_or(0.5 * (clamp_a + clamp_b));

    match s_end {
        Some((a, b, true)) => {
            // The candidate's real domain ends inside this cell. Bisect to
            // the edge; if the candidate already crossed zero before the
            // edge, this is really a smooth termination the coarse scan
            // stepped over.
            let (mut xa, mut xb) = (a, b);
            for _ in 0..200 {
                let m = 0.5 * (xa + xb);
                if broadcast_candidate(&law, p, beta, m).is_some() {
                    xa = m;
                } else {
                    xb = m;
                }
            }
            let dead_end = xa;
            if broadcast_candidate(&law, p, beta, dead_end).unwrap_or(0.0) <= 0.0 {
                let root = numerics::find_root(
                    cand,
                    numerics::Bracket::new(a, dead_end),
                    Tolerance { abs_tol: 1e-13, ..Default::default() },
                )
                .unwrap_or(dead_end);
                let law3 = law.clone();
                let interior: ScalarFn =
                    Arc::new(move |x: f64| broadcast_candidate(&law3, p, beta, x).unwrap_or(0.0));
                let profile = DcProfile {
                    beta_power: bp,
                    s_lo: s_lo_val,
                    s_hi: root,
                    interior: Some(interior),
                    has_density: true,
                    atoms: Vec::new(),
                };
                let dc = dc_rate(&profile, cfg)?;
                let ndc = ndc_rate(&profile, cfg);
                let plain = BroadcastJoint { profile, dc_rate: dc, ndc_rate: ndc };
                // The thin-window cases are atom-dominated; keep whichever
                // of the smooth and junction-tuned constructions wins.
                let tuned = best_atom_terminated(cfg, s_lo_val, root);
                if tuned.dc_rate + tuned.ndc_rate > plain.dc_rate + plain.ndc_rate {
                    return Ok(tuned);
                }
                return Ok(plain);
            }
            // Leftover power rides in a discrete layer; the clamp junction
            // and the cut point are free parameters of that construction,
            // and the family degenerates to pure outage when they meet,
            // which keeps the solution at least as good as single-layer.
            Ok(best_atom_terminated(cfg, s_lo_val, dead_end))
        }
        Some((a, b, false)) => {
            // Smooth zero at the upper end: clamped Euler solution, kept
            // only if the junction-tuned family (which contains pure
            // outage) does not beat it.
            let root =
                numerics::find_root(cand, numerics::Bracket::new(a, b), Tolerance::default())
                    .unwrap_or(0.5 * (a + b));
            let law3 = law.clone();
            let interior: ScalarFn =
                Arc::new(move |x: f64| broadcast_candidate(&law3, p, beta, x).unwrap_or(0.0));
            let profile = DcProfile {
                beta_power: bp,
                s_lo: s_lo_val,
                s_hi: root,
                interior: Some(interior),
                has_density: true,
                atoms: Vec::new(),
            };
            let dc = dc_rate(&profile, cfg)?;
            let ndc = ndc_rate(&profile, cfg);
            let plain = BroadcastJoint { profile, dc_rate: dc, ndc_rate: ndc };
            if beta < 1.0 {
                let tuned = best_atom_terminated(cfg, s_lo_val, root);
                if tuned.dc_rate + tuned.ndc_rate > plain.dc_rate + plain.ndc_rate + 1e-12 {
                    return Ok(tuned);
                }
            }
            Ok(plain)
        }
        None => {
            let law3 = law.clone();
            let interior: ScalarFn =
                Arc::new(move |x: f64| broadcast_candidate(&law3, p, beta, x).unwrap_or(0.0));
            let profile = DcProfile {
                beta_power: bp,
                s_lo: s_lo_val,
                s_hi: hi,
                interior: Some(interior),
                has_density: true,
                atoms: Vec::new(),
            };
            let dc = dc_rate(&profile, cfg)?;
            let ndc = ndc_rate(&profile, cfg);
            Ok(BroadcastJoint { profile, dc_rate: dc, ndc_rate: ndc })
        }
    }
}

/// Assemble the clamp / Euler-curve / terminal-atom profile for junction
/// gains `(s_clamp, s_cut)` and evaluate its total rate.
fn atom_terminated_profile(
    cfg: &DcNdcConfig,
    s_clamp: f64,
    s_cut: f64,
) -> (DcProfile, f64, f64) {
    let bp = cfg.beta * cfg.power;
    let law = cfg.law.clone();
    let (p, beta) = (cfg.power, cfg.beta);
    let merged = s_cut - s_clamp < 1e-9;
    let profile = if merged {
        DcProfile::outage(s_clamp, bp)
    } else {
        let i_at_clamp = broadcast_candidate(&law, p, beta, s_clamp).unwrap_or(bp).clamp(0.0, bp);
        let i_at_cut = broadcast_candidate(&law, p, beta, s_cut).unwrap_or(0.0).clamp(0.0, bp);
        let mut atoms = Vec::new();
        if bp - i_at_clamp > 1e-12 {
            atoms.push((s_clamp, bp - i_at_clamp));
        }
        if i_at_cut > 1e-12 {
            atoms.push((s_cut, i_at_cut));
        }
        let law2 = law.clone();
        let interior: ScalarFn = Arc::new(move |x: f64| {
            broadcast_candidate(&law2, p, beta, x).unwrap_or(0.0)
        });
        DcProfile {
            beta_power: bp,
            s_lo: s_clamp,
            s_hi: s_cut,
            interior: Some(interior),
            has_density: true,
            atoms,
        }
    };
    let dc = dc_rate(&profile, cfg).unwrap_or(0.0);
    let ndc = ndc_rate(&profile, cfg);
    (profile, dc, ndc)
}

fn best_atom_terminated(cfg: &DcNdcConfig, s_lo_naive: f64, dead_end: f64) -> BroadcastJoint {
    // Junction search over s_clamp in [s_lo_naive, dead_end] and
    // s_cut in [s_clamp, dead_end], parametrized on the unit square.
    let lo = s_lo_naive;
    let span = (dead_end - lo).max(1e-12);
    let tol = Tolerance { abs_tol: 1e-10, rel_tol: 1e-9, max_iter: 200 };
    let objective = |q: &[f64]| {
        let s_clamp = lo + q[0] * span;
        let s_cut = s_clamp + q[1] * (dead_end - s_clamp);
        let (_, dc, ndc) = atom_terminated_profile(cfg, s_clamp, s_cut);
        dc + ndc
    };
    let (q, _) = numerics::maximize(objective, &[0.0, 0.0], &[1.0, 1.0], tol)
        .unwrap_or((vec![0.0, 1.0], 0.0));
    let s_clamp = lo + q[0] * span;
    let s_cut = s_clamp + q[1] * (dead_end - s_clamp);
    let (profile, dc, ndc) = atom_terminated_profile(cfg, s_clamp, s_cut);

    // Also consider the plain single-layer optimum as the degenerate
    // corner; keep whichever wins.
    let single = outage_joint(cfg);
    if single.dc_rate + single.ndc_rate > dc + ndc {
        let profile = DcProfile::outage(single.s_th, cfg.beta * cfg.power);
        BroadcastJoint { profile, dc_rate: single.dc_rate, ndc_rate: single.ndc_rate }
    } else {
        BroadcastJoint { profile, dc_rate: dc, ndc_rate: ndc }
    }
}
