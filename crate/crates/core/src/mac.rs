//! Two-user multiple-access broadcast layering: two-state and l-state
//! achievable regions without CSIT, outer bounds, average rates, and the
//! local-CSIT regions with their outer-bound corner points.
//!
//! This module follows the half-log2 rate convention
//! C(x, y) = (1/2) log2(1 + x / (y + 1/P)); every other module is in nats.

use thiserror::Error;

use crate::numerics::{self, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MacError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid power split: {0}")]
    InvalidSplit(String),
    #[error("at least two channel states required, got {0}")]
    TooFewStates(usize),
}

/// Rate unit used throughout the module.
pub fn c_fn(x: f64, y: f64, power: f64) -> f64 {
    0.5 * (1.0 + x / (y + 1.0 / power)).log2()
}

/// Shared gain levels with per-user state probabilities.
#[derive(Debug, Clone)]
pub struct MacConfig {
    pub levels: Vec<f64>,
    /// State distribution of transmitter 1.
    pub q: Vec<f64>,
    /// State distribution of transmitter 2.
    pub p: Vec<f64>,
    pub power: f64,
}

impl MacConfig {
    pub fn new(levels: Vec<f64>, q: Vec<f64>, p: Vec<f64>, power: f64) -> Result<Self, MacError> {
        if levels.is_empty() || levels[0] <= 0.0 || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MacError::InvalidConfig("levels must be ascending positive".into()));
        }
        for probs in [&q, &p] {
            if probs.len() != levels.len()
                || probs.iter().any(|&v| v < 0.0)
                || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9
            {
                return Err(MacError::InvalidConfig("state probabilities invalid".into()));
            }
        }
        if !(power > 0.0) {
            return Err(MacError::InvalidConfig("power must be positive".into()));
        }
        Ok(MacConfig { levels, q, p, power })
    }

    pub fn two_state(s1: f64, s2: f64, q1: f64, p1: f64, power: f64) -> Result<Self, MacError> {
        Self::new(vec![s1, s2], vec![q1, 1.0 - q1], vec![p1, 1.0 - p1], power)
    }
}

/// Fractions of each transmitter's power per codebook, indexed
/// `[other_state][own_state]` (row u, column v for codebook W_{uv}).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSplit {
    pub user1: Vec<Vec<f64>>,
    pub user2: Vec<Vec<f64>>,
}

impl PowerSplit {
    pub fn new(user1: Vec<Vec<f64>>, user2: Vec<Vec<f64>>) -> Result<Self, MacError> {
        for table in [&user1, &user2] {
            let total: f64 = table.iter().flatten().sum();
            if table.iter().flatten().any(|&b| !(0.0..=1.0 + 1e-12).contains(&b))
                || (total - 1.0).abs() > 1e-12
            {
                return Err(MacError::InvalidSplit(format!(
                    "fractions must be in [0,1] and sum to 1 (sum = {total})"
                )));
            }
        }
        Ok(PowerSplit { user1, user2 })
    }

    /// Symmetric split shared by both users.
    pub fn symmetric(table: Vec<Vec<f64>>) -> Result<Self, MacError> {
        Self::new(table.clone(), table)
    }

    pub fn is_symmetric(&self) -> bool {
        self.user1
            .iter()
            .flatten()
            .zip(self.user2.iter().flatten())
            .all(|(a, b)| (a - b).abs() < 1e-12)
    }
}

/// Linear rate constraint sum(coeffs . rates) <= bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub bound: f64,
}

/// A set of rate constraints plus sampled boundary points.
#[derive(Debug, Clone)]
pub struct RateRegion {
    pub rate_names: Vec<String>,
    pub constraints: Vec<Constraint>,
    pub boundary: Vec<Vec<f64>>,
}

impl RateRegion {
    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        self.constraints.iter().all(|c| {
            let lhs: f64 = c.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
            lhs <= c.bound + tol
        })
    }

    /// Largest value of `objective . rates` inside the region (rates are
    /// also bounded below by zero). Small dimensions only: vertices are
    /// enumerated from active constraint pairs per coordinate plane.
    fn max_weighted(&self, objective: &[f64]) -> f64 {
        // The regions built here have per-rate upper bounds plus a few
        // coupling constraints on (R12, R21); handle the general case by
        // scalarizing each rate at its tightest individual bound and then
        // maximizing the coupled pair exactly.
        // Individual caps:
        let dim = objective.len();
        let mut caps = vec![f64::INFINITY; dim];
        for c in &self.constraints {
            let active: Vec<usize> =
                (0..dim).filter(|&i| c.coeffs[i] != 0.0).collect();
            if active.len() == 1 {
                let i = active[0];
                caps[i] = caps[i].min(c.bound / c.coeffs[i]);
            }
        }
        // Coupled constraints over the pair (1, 2) = (R12, R21) when
        // present; enumerate vertices of that 2-D polytope.
        let coupled: Vec<&Constraint> = self
            .constraints
            .iter()
            .filter(|c| c.coeffs.iter().filter(|&&a| a != 0.0).count() > 1)
            .collect();
        if coupled.is_empty() {
            return (0..dim).map(|i| objective[i] * caps[i].max(0.0)).sum();
        }
        // Gather the two coupled coordinates (assume exactly two).
        let mut idx = Vec::new();
        for c in &coupled {
            for i in 0..dim {
                if c.coeffs[i] != 0.0 && !idx.contains(&i) {
                    idx.push(i);
                }
            }
        }
        assert!(idx.len() == 2, "only pairwise coupling supported");
        let (i, j) = (idx[0], idx[1]);
        // Lines: individual caps as well.
        let mut lines: Vec<(f64, f64, f64)> = Vec::new(); // a x + b y <= c
        lines.push((1.0, 0.0, caps[i]));
        lines.push((0.0, 1.0, caps[j]));
        for c in &coupled {
            lines.push((c.coeffs[i], c.coeffs[j], c.bound));
        }
        lines.push((-1.0, 0.0, 0.0));
        lines.push((0.0, -1.0, 0.0));
        let mut best_pair = 0.0f64;
        for a in 0..lines.len() {
            for b in (a + 1)..lines.len() {
                let (a1, b1, c1) = lines[a];
                let (a2, b2, c2) = lines[b];
                let det = a1 * b2 - a2 * b1;
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = (c1 * b2 - c2 * b1) / det;
                let y = (a1 * c2 - a2 * c1) / det;
                if x < -1e-9 || y < -1e-9 {
                    continue;
                }
                let feasible = lines.iter().all(|&(la, lb, lc)| la * x + lb * y <= lc + 1e-9);
                if feasible {
                    best_pair = best_pair.max(objective[i] * x + objective[j] * y);
                }
            }
        }
        let rest: f64 = (0..dim)
            .filter(|k| *k != i && *k != j)
            .map(|k| objective[k] * caps[k].max(0.0))
            .sum();
        rest + best_pair
    }
}

/// Capacity region (R_w, R_s) when each user splits into one stream per
/// own-channel state: boundary sampled over the strong-stream fraction.
pub fn su_region(s1: f64, s2: f64, power: f64, n_beta: usize) -> RateRegion {
    assert!(0.0 < s1 && s1 < s2, "need 0 < s1 < s2");
    let mut boundary = Vec::with_capacity(n_beta + 1);
    for k in 0..=n_beta {
        let beta = k as f64 / n_beta as f64;
        let rw = c_fn(2.0 * s1 * (1.0 - beta), 2.0 * s1 * beta, power);
        let rs = c_fn(2.0 * s2 * beta, 0.0, power);
        boundary.push(vec![rw, rs]);
    }
    RateRegion {
        rate_names: vec!["R_w".into(), "R_s".into()],
        constraints: Vec::new(),
        boundary,
    }
}

/// The seven bounds of the symmetric two-state achievable region, in the
/// order (r11, r12, r21, r1, r12', r21', r22).
pub fn two_state_bounds(cfg: &MacConfig, split: &PowerSplit) -> Result<[f64; 7], MacError> {
    if cfg.levels.len() != 2 {
        return Err(MacError::InvalidConfig("two-state bounds need exactly two levels".into()));
    }
    if !split.is_symmetric() {
        return Err(MacError::InvalidSplit(
            "two-state bounds assume a symmetric split".into(),
        ));
    }
    let (s1, s2) = (cfg.levels[0], cfg.levels[1]);
    let p = cfg.power;
    let b = &split.user1;
    let (b11, b12, b21, b22) = (b[0][0], b[0][1], b[1][0], b[1][1]);
    let b11_bar = 1.0 - b11;
    let r11 = (0.5 * c_fn(2.0 * s1 * b11, 2.0 * s1 * b11_bar, p))
        .min(c_fn(s1 * b11, (s1 + s2) * b11_bar, p));
    let cross_if = s1 * (b12 + b22) + s2 * (b21 + b22);
    let r12 =
        (0.5 * c_fn(2.0 * s2 * b12, 2.0 * s2 * b22, p)).min(c_fn(s2 * b12, cross_if, p));
    let r21 =
        (0.5 * c_fn(2.0 * s2 * b21, 2.0 * s2 * b22, p)).min(c_fn(s1 * b21, cross_if, p));
    let r1 = (0.5 * c_fn(2.0 * s2 * (b12 + b21), 2.0 * s2 * b22, p))
        .min(c_fn(s1 * b21 + s2 * b12, cross_if, p));
    let r12p = c_fn(s2 * (2.0 * b12 + b21), 2.0 * s2 * b22, p);
    let r21p = c_fn(s2 * (b12 + 2.0 * b21), 2.0 * s2 * b22, p);
    let r22 = 0.5 * c_fn(2.0 * s2 * b22, 0.0, p);
    Ok([r11, r12, r21, r1, r12p, r21p, r22])
}

/// Achievable region over (R11, R12, R21, R22) for a symmetric split.
pub fn full_region(cfg: &MacConfig, split: &PowerSplit) -> Result<RateRegion, MacError> {
    let [r11, r12, r21, r1, r12p, r21p, r22] = two_state_bounds(cfg, split)?;
    let cons = vec![
        Constraint { coeffs: vec![1.0, 0.0, 0.0, 0.0], bound: r11 },
        Constraint { coeffs: vec![0.0, 1.0, 0.0, 0.0], bound: r12 },
        Constraint { coeffs: vec![0.0, 0.0, 1.0, 0.0], bound: r21 },
        Constraint { coeffs: vec![0.0, 1.0, 1.0, 0.0], bound: r1 },
        Constraint { coeffs: vec![0.0, 2.0, 1.0, 0.0], bound: r12p },
        Constraint { coeffs: vec![0.0, 1.0, 2.0, 0.0], bound: r21p },
        Constraint { coeffs: vec![0.0, 0.0, 0.0, 1.0], bound: r22 },
    ];
    // Sample the extreme points of the coupled (R12, R21) trade-off.
    let mut boundary = Vec::new();
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let a = (r12 * t).min(r1).min(0.5 * r12p);
        let b = r21
            .min((r1 - a).max(0.0))
            .min(((r12p - 2.0 * a).max(0.0)).min((r21p - a).max(0.0) / 2.0));
        boundary.push(vec![r11, a, b.max(0.0), r22]);
    }
    let region = RateRegion {
        rate_names: vec!["R11".into(), "R12".into(), "R21".into(), "R22".into()],
        constraints: cons,
        boundary,
    };
    Ok(region)
}

/// Reduced region over (R_w, R_s) when the own-weak cross layers and the
/// double-strong layers carry no power. Splits may differ per user here.
pub fn reduced_region(cfg: &MacConfig, split: &PowerSplit) -> Result<RateRegion, MacError> {
    if cfg.levels.len() != 2 {
        return Err(MacError::InvalidConfig("reduction needs two levels".into()));
    }
    for table in [&split.user1, &split.user2] {
        if table[1][0].abs() > 1e-12 || table[1][1].abs() > 1e-12 {
            return Err(MacError::InvalidSplit(
                "reduction requires zero power on the {21, 22} codebooks".into(),
            ));
        }
    }
    let (s1, s2) = (cfg.levels[0], cfg.levels[1]);
    let p = cfg.power;
    let (b1_11, b2_11) = (split.user1[0][0], split.user2[0][0]);
    let (b1_12, b2_12) = (split.user1[0][1], split.user2[0][1]);
    let (bar1, bar2) = (1.0 - b1_11, 1.0 - b2_11);
    let a3 = c_fn(s1 * (b1_11 + b2_11), s1 * (bar1 + bar2), p);
    let a4 = c_fn(s1 * b1_11, s1 * bar1 + s2 * bar2, p);
    let a6 = c_fn(s1 * b1_11 + s2 * b2_11, s1 * bar1 + s2 * bar2, p);
    let a8 = c_fn(s1 * b2_11, s2 * bar1 + s1 * bar2, p);
    let a9 = c_fn(s2 * b1_11 + s1 * b2_11, s2 * bar1 + s1 * bar2, p);
    let rw_bound = a3.min(a6).min(a9).min(a4 + a8);
    let rs_bound = c_fn(s2 * b1_12 + s2 * b2_12, 0.0, p);
    Ok(RateRegion {
        rate_names: vec!["R_w".into(), "R_s".into()],
        constraints: vec![
            Constraint { coeffs: vec![1.0, 0.0], bound: rw_bound },
            Constraint { coeffs: vec![0.0, 1.0], bound: rs_bound },
        ],
        boundary: vec![vec![rw_bound, rs_bound]],
    })
}

/// Outer bound on (R11, R12, R21, R22); per-user splits allowed.
pub fn outer_bound(cfg: &MacConfig, split: &PowerSplit) -> Result<RateRegion, MacError> {
    if cfg.levels.len() != 2 {
        return Err(MacError::InvalidConfig("outer bound needs two levels".into()));
    }
    let (s1, s2) = (cfg.levels[0], cfg.levels[1]);
    let p = cfg.power;
    let (t1, t2) = (&split.user1, &split.user2);
    let a3 = c_fn(
        s1 * (t1[0][0] + t2[0][0]),
        s1 * ((1.0 - t1[0][0]) + (1.0 - t2[0][0])),
        p,
    );
    let a24 = c_fn(s2 * (t1[0][1] + t2[0][1]), s2 * (t1[1][1] + t2[1][1]), p);
    let a27 = c_fn(s2 * (t1[1][0] + t2[1][0]), s2 * (t1[1][1] + t2[1][1]), p);
    // Symmetric-rate bound on the double-strong codebooks.
    let b22 = 0.5 * (t1[1][1] + t2[1][1]);
    let r22 = 0.5 * c_fn(2.0 * s2 * b22, 0.0, p);
    Ok(RateRegion {
        rate_names: vec!["R11".into(), "R12".into(), "R21".into(), "R22".into()],
        constraints: vec![
            Constraint { coeffs: vec![1.0, 0.0, 0.0, 0.0], bound: 0.5 * a3 },
            Constraint { coeffs: vec![0.0, 1.0, 0.0, 0.0], bound: 0.5 * a24 },
            Constraint { coeffs: vec![0.0, 0.0, 1.0, 0.0], bound: 0.5 * a27 },
            Constraint { coeffs: vec![0.0, 0.0, 0.0, 1.0], bound: r22 },
        ],
        boundary: Vec::new(),
    })
}

/// Average two-user sum rate for symmetric per-codebook rates at
/// weak-state probability `p_weak`.
pub fn average_sum_rate(rates: &[f64; 4], p_weak: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p_weak));
    let q = 1.0 - p_weak;
    2.0 * (rates[0] + q * (rates[1] + rates[2]) + q * q * rates[3])
}

/// Best average sum rate over symmetric splits: the per-codebook rates are
/// set to the largest values permitted by the seven bounds.
pub fn optimize_average_sum_rate(cfg: &MacConfig, p_weak: f64) -> (PowerSplit, f64) {
    let q = 1.0 - p_weak;
    let weights = [1.0, q, q, q * q];
    let (split, value) = optimize_weighted(cfg, &weights);
    (split, 2.0 * value)
}

/// Maximizes sum(weights . best rates) over symmetric splits.
fn optimize_weighted(cfg: &MacConfig, weights: &[f64; 4]) -> (PowerSplit, f64) {
    let objective = |x: &[f64]| -> f64 {
        let split = stick_breaking_split(x);
        match full_region(cfg, &split) {
            Ok(region) => region.max_weighted(weights),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let tol = Tolerance { abs_tol: 1e-10, rel_tol: 1e-10, max_iter: 300 };
    let (x, value) =
        numerics::maximize(objective, &[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], tol).unwrap();
    (stick_breaking_split(&x), value)
}

/// Maps the unit cube onto the 4-codebook simplex.
fn stick_breaking_split(x: &[f64]) -> PowerSplit {
    let b11 = x[0];
    let b12 = (1.0 - b11) * x[1];
    let b21 = (1.0 - b11 - b12) * x[2];
    let b22 = (1.0 - b11 - b12 - b21).max(0.0);
    PowerSplit::symmetric(vec![vec![b11, b12], vec![b21, b22]]).unwrap()
}

/// Weighted-sum boundary of (sum of always/one-strong rates, double-strong
/// rate): points maximize w*Rw_bar + (1-w)*Rs_bar over symmetric splits.
pub fn full_region_tradeoff(cfg: &MacConfig, n_points: usize) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(n_points);
    for k in 0..n_points {
        let w = (k as f64 + 0.5) / n_points as f64;
        let weights = [w, w, w, 1.0 - w];
        let (split, _) = optimize_weighted(cfg, &weights);
        let region = full_region(cfg, &split).unwrap();
        // Recover the two grouped coordinates at the optimal split.
        let rw = region.max_weighted(&[1.0, 1.0, 1.0, 0.0]);
        let r22 = region.max_weighted(&[0.0, 0.0, 0.0, 1.0]);
        pts.push((2.0 * rw, 2.0 * r22));
    }
    pts
}

// ---------------------------------------------------------------------
// l-state region without CSIT.
// ---------------------------------------------------------------------

/// Cumulative split fractions over a rectangular index window:
/// sum of beta[m][n] for m in rows, n in cols (1-based inclusive bounds).
fn window_sum(beta: &[Vec<f64>], rows: (usize, usize), cols: (usize, usize)) -> f64 {
    let mut acc = 0.0;
    for m in rows.0..=rows.1 {
        for n in cols.0..=cols.1 {
            if m >= 1 && n >= 1 {
                acc += beta[m - 1][n - 1];
            }
        }
    }
    acc
}

/// The eight cumulative-power sums feeding the l-state constants.
/// Index names follow the (j, u, v) windows of the region constants.
pub fn cumulative_sums(beta: &[Vec<f64>], j: usize, u: usize, v: usize) -> [f64; 8] {
    let l = beta.len();
    let b1 = 1.0 - window_sum(beta, (1, v - 1), (1, j)) - window_sum(beta, (v, v), (1, u));
    let b2 = 1.0 - window_sum(beta, (1, j), (1, v - 1)) - window_sum(beta, (1, u), (v, v));
    let b3 = 1.0
        - window_sum(beta, (1, v - 1), (1, v - 1))
        - window_sum(beta, (v, v), (1, u))
        - window_sum(beta, (1, u), (v, v));
    let b4 = 1.0 - window_sum(beta, (1, u), (1, v - 1)) - window_sum(beta, (1, u), (v, v));
    let b5 = 1.0 - window_sum(beta, (1, v - 1), (1, u)) - window_sum(beta, (v, v), (1, u));
    let b6 = 1.0 - window_sum(beta, (1, v - 1), (1, j)) - window_sum(beta, (v, v), (1, u));
    let b7 = 1.0 - window_sum(beta, (1, j), (1, v - 1)) - window_sum(beta, (1, u), (v, v));
    let b8 = 1.0 - window_sum(beta, (1, v), (1, u));
    let _ = l;
    [b1, b2, b3, b4, b5, b6, b7, b8]
}

/// Per-pair constraint bounds of the l-state region for codebooks
/// (W_uv, W_vu) with u < v, plus the diagonal bound for W_uu.
#[derive(Debug, Clone)]
pub struct MultiStateBounds {
    /// (u, v) -> [R_uv cap, R_vu cap, pair sum cap, 2R_uv+R_vu cap,
    /// R_uv+2R_vu cap].
    pub pair_bounds: Vec<((usize, usize), [f64; 5])>,
    /// u -> R_uu cap.
    pub diagonal_bounds: Vec<f64>,
}

/// Evaluates the l-state achievable-region constants for a symmetric
/// split table beta[u][v] (1-based codebook indices, stored 0-based).
pub fn multistate_region(cfg: &MacConfig, beta: &[Vec<f64>]) -> Result<MultiStateBounds, MacError> {
    let l = cfg.levels.len();
    if l < 2 {
        return Err(MacError::TooFewStates(l));
    }
    if beta.len() != l || beta.iter().any(|row| row.len() != l) {
        return Err(MacError::InvalidSplit("split table must be l x l".into()));
    }
    let total: f64 = beta.iter().flatten().sum();
    if (total - 1.0).abs() > 1e-9 || beta.iter().flatten().any(|&b| b < 0.0) {
        return Err(MacError::InvalidSplit("fractions must be nonnegative and sum to 1".into()));
    }
    let s = &cfg.levels;
    let p = cfg.power;
    let sl = s[l - 1];
    let mut pair_bounds = Vec::new();
    for u in 1..=l {
        for v in (u + 1)..=l {
            let b_uv = beta[u - 1][v - 1];
            let b_vu = beta[v - 1][u - 1];
            let sums_uv = cumulative_sums(beta, u, u, v);
            let b3s = sums_uv[2];
            // R_uv: min over the decode states j >= u of the cross bound,
            // plus the worst-case and pairwise-half bounds.
            let mut b1 = f64::INFINITY;
            let mut b6 = f64::INFINITY;
            for j in u..=l {
                let sums_j = cumulative_sums(beta, j, u, v);
                b1 = b1.min(c_fn(
                    s[v - 1] * b_uv,
                    s[j - 1] * sums_j[0] + s[v - 1] * sums_j[1],
                    p,
                ));
                b6 = b6.min(c_fn(
                    s[j - 1] * b_vu + s[v - 1] * b_uv,
                    s[j - 1] * sums_j[5] + s[v - 1] * sums_j[6],
                    p,
                ));
            }
            let b2 = c_fn(s[v - 1] * b_uv, (s[v - 1] + sl) * b3s, p);
            let b3 = c_fn(2.0 * s[v - 1] * b_uv, 2.0 * s[v - 1] * b3s, p);
            let b4 = c_fn(
                s[u - 1] * b_vu,
                sl * sums_uv[3] + s[u - 1] * sums_uv[4],
                p,
            );
            let b5 = c_fn(2.0 * s[v - 1] * b_vu, 2.0 * s[v - 1] * b3s, p);
            let b7 = c_fn(s[v - 1] * (b_uv + b_vu), (s[v - 1] + sl) * b3s, p);
            let b8 = c_fn(2.0 * s[v - 1] * (b_uv + b_vu), 2.0 * s[v - 1] * b3s, p);
            let b9 = c_fn(s[v - 1] * (2.0 * b_uv + b_vu), 2.0 * s[v - 1] * b3s, p);
            let b10 = c_fn(s[v - 1] * (b_uv + 2.0 * b_vu), 2.0 * s[v - 1] * b3s, p);
            let r_uv = b1.min(b2).min(0.5 * b3);
            let r_vu = b4.min(0.5 * b5);
            let r_pair = b6.min(b7).min(0.5 * b8);
            pair_bounds.push(((u, v), [r_uv, r_vu, r_pair, b9, b10]));
        }
    }
    let mut diagonal_bounds = Vec::with_capacity(l);
    for u in 1..=l {
        let sums = cumulative_sums(beta, u, u, u);
        let b8s = sums[7];
        let b11 = c_fn(s[u - 1] * beta[u - 1][u - 1], (s[u - 1] + sl) * b8s, p);
        let b12 = c_fn(2.0 * s[u - 1] * beta[u - 1][u - 1], 2.0 * s[u - 1] * b8s, p);
        diagonal_bounds.push(b11.min(0.5 * b12));
    }
    Ok(MultiStateBounds { pair_bounds, diagonal_bounds })
}

// ---------------------------------------------------------------------
// Local CSIT.
// ---------------------------------------------------------------------

/// Per-own-state splits for local CSIT: when a transmitter sees state m it
/// spreads power over layers 1..=m; `splits[m-1][j-1]` is the fraction on
/// the layer adapted to other-user state j.
#[derive(Debug, Clone)]
pub struct LocalSplits {
    pub user1: Vec<Vec<f64>>,
    pub user2: Vec<Vec<f64>>,
}

impl LocalSplits {
    pub fn new(user1: Vec<Vec<f64>>, user2: Vec<Vec<f64>>) -> Result<Self, MacError> {
        for table in [&user1, &user2] {
            for (m, row) in table.iter().enumerate() {
                if row.len() != m + 1 {
                    return Err(MacError::InvalidSplit(format!(
                        "state {} must have {} layers",
                        m + 1,
                        m + 1
                    )));
                }
                let total: f64 = row.iter().sum();
                if row.iter().any(|&b| b < 0.0) || (total - 1.0).abs() > 1e-9 {
                    return Err(MacError::InvalidSplit(
                        "per-state fractions must sum to 1".into(),
                    ));
                }
            }
        }
        Ok(LocalSplits { user1, user2 })
    }
}

/// Residual fraction of a user's power above layer j when in state n.
fn residual_after(table: &[Vec<f64>], j: usize, n: usize) -> f64 {
    if j >= n {
        return 0.0;
    }
    let row = &table[n - 1];
    1.0 - row[..j].iter().sum::<f64>()
}

/// Achievable average-rate constraints for local CSIT with state-adapted
/// layering: (R1 cap, R2 cap, sum cap).
pub fn local_csit_multistate(cfg: &MacConfig, splits: &LocalSplits) -> Result<[f64; 3], MacError> {
    let l = cfg.levels.len();
    if splits.user1.len() != l || splits.user2.len() != l {
        return Err(MacError::InvalidSplit("need one split row per state".into()));
    }
    let s = &cfg.levels;
    let p = cfg.power;

    // Worst case over the other user's state of the rate of layer j when
    // transmitting in own state v.
    let layer_rate = |own: &[Vec<f64>], other: &[Vec<f64>], j: usize, v: usize| -> f64 {
        let own_if = s[v - 1] * residual_after(own, j, v);
        let mut worst = f64::INFINITY;
        for n in 1..=l {
            let other_if = s[n - 1] * residual_after(other, j.min(n), n);
            worst = worst.min(c_fn(s[v - 1] * own[v - 1][j - 1], own_if + other_if, p));
        }
        worst
    };

    let mut r1 = 0.0;
    let mut r2 = 0.0;
    for v in 1..=l {
        let mut sum1 = 0.0;
        let mut sum2 = 0.0;
        for j in 1..=v {
            sum1 += layer_rate(&splits.user1, &splits.user2, j, v);
            sum2 += layer_rate(&splits.user2, &splits.user1, j, v);
        }
        r1 += cfg.q[v - 1] * sum1;
        r2 += cfg.p[v - 1] * sum2;
    }

    // Sum-rate cap: per-state full-power MAC sum capacity averaged over
    // the joint state distribution.
    let mut rsum = 0.0;
    for m in 1..=l {
        for n in 1..=l {
            rsum += cfg.q[m - 1] * cfg.p[n - 1] * c_fn(s[m - 1] + s[n - 1], 0.0, p);
        }
    }
    Ok([r1, r2, rsum])
}

/// Two-state local-CSIT region as printed: explicit in the four per-user
/// fractions (beta_12, beta_22 per user).
pub fn local_csit_region(cfg: &MacConfig, splits: &LocalSplits) -> Result<[f64; 3], MacError> {
    if cfg.levels.len() != 2 {
        return Err(MacError::InvalidConfig("two-state region needs two levels".into()));
    }
    let (s1, s2) = (cfg.levels[0], cfg.levels[1]);
    let p = cfg.power;
    let (q1, q2) = (cfg.q[0], cfg.q[1]);
    let (p1, p2) = (cfg.p[0], cfg.p[1]);
    let (b1_12, b1_22) = (splits.user1[1][0], splits.user1[1][1]);
    let (b2_12, b2_22) = (splits.user2[1][0], splits.user2[1][1]);
    let r1 = q1 * c_fn(s1, s2 * b2_22, p)
        + q2 * (c_fn(s2 * b1_12, s2 * b1_22 + s2 * b2_22, p) + c_fn(s2 * b1_22, 0.0, p));
    let r2 = p1 * c_fn(s1, s2 * b1_22, p)
        + p2 * (c_fn(s2 * b2_12, s2 * b1_22 + s2 * b2_22, p) + c_fn(s2 * b2_22, 0.0, p));
    let rsum = q1 * p1 * c_fn(2.0 * s1, 0.0, p)
        + q1 * p2 * c_fn(s1 + s2 * b2_12 + s2 * b2_22, 0.0, p)
        + q2 * p1 * c_fn(s1 + s2 * b1_12 + s2 * b1_22, 0.0, p)
        + q2 * p2 * c_fn(s2 * (b1_12 + b2_12 + b1_22 + b2_22), 0.0, p);
    Ok([r1, r2, rsum])
}

/// Boundary of the local-CSIT average-rate region by weighted-sum search
/// over the per-user strong-state splits.
pub fn local_csit_boundary(cfg: &MacConfig, n_points: usize) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(n_points);
    for k in 0..n_points {
        let w = (k as f64 + 0.5) / n_points as f64;
        let objective = |x: &[f64]| -> f64 {
            let splits = LocalSplits::new(
                vec![vec![1.0], vec![x[0], 1.0 - x[0]]],
                vec![vec![1.0], vec![x[1], 1.0 - x[1]]],
            )
            .unwrap();
            let caps = local_csit_region(cfg, &splits).unwrap();
            // Best (R1, R2) pair inside the pentagon for this weight.
            let r1 = caps[0].min(caps[2]);
            let r2 = caps[1].min(caps[2] - r1.min(caps[2]));
            if w >= 0.5 {
                w * r1 + (1.0 - w) * r2
            } else {
                let r2b = caps[1].min(caps[2]);
                let r1b = caps[0].min(caps[2] - r2b.min(caps[2]));
                w * r1b + (1.0 - w) * r2b
            }
        };
        let tol = Tolerance { abs_tol: 1e-9, rel_tol: 1e-9, max_iter: 200 };
        let (x, _) = numerics::maximize(objective, &[0.0, 0.0], &[1.0, 1.0], tol).unwrap();
        let splits = LocalSplits::new(
            vec![vec![1.0], vec![x[0], 1.0 - x[0]]],
            vec![vec![1.0], vec![x[1], 1.0 - x[1]]],
        )
        .unwrap();
        let caps = local_csit_region(cfg, &splits).unwrap();
        if w >= 0.5 {
            let r1 = caps[0].min(caps[2]);
            pts.push((r1, caps[1].min(caps[2] - r1)));
        } else {
            let r2 = caps[1].min(caps[2]);
            pts.push((caps[0].min(caps[2] - r2), r2));
        }
    }
    pts
}

/// Corner points of the outer bound with one full-CSIT user.
#[derive(Debug, Clone)]
pub struct CornerPoints {
    pub t: (f64, f64),
    pub u: (f64, f64),
    pub v: (f64, f64),
    pub w: (f64, f64),
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub z: (f64, f64),
    /// Argmax indices of the mu selectors (1-based; smallest on ties).
    pub i_star: usize,
    pub j_star: usize,
}

/// Evaluates the corner-point formulas for a two-state configuration with
/// an optional explicit split for the X point.
pub fn local_csit_corner_points(cfg: &MacConfig, split_x: (f64, f64)) -> Result<CornerPoints, MacError> {
    if cfg.levels.len() != 2 {
        return Err(MacError::InvalidConfig("corner points need two levels".into()));
    }
    let (s1, s2) = (cfg.levels[0], cfg.levels[1]);
    let p = cfg.power;
    let (q1, q2) = (cfg.q[0], cfg.q[1]);
    let (p1, p2) = (cfg.p[0], cfg.p[1]);
    let (p11, p12, p21, p22) = (q1 * p1, q1 * p2, q2 * p1, q2 * p2);
    let c = |x: f64, y: f64| c_fn(x, y, p);

    let b1 = p1 * c(s1, 0.0) + p2 * c(s2, 0.0);
    let b2 = q1 * c(s1, s2) + q2 * c(s2, s2);
    let mu = [
        p1 * c(s1, 0.0) + p2 * (c(s1 + s2, 2.0 * s1) + c(s1, 0.0)),
        p1 * (c(2.0 * s1, s1 + s2) + c(s2, 0.0)) + p2 * c(s2, 0.0),
    ];
    let mu_hat = [
        p1 * c(s1, 0.0) + p2 * (c(2.0 * s2, s1 + s2) + c(s1, 0.0)),
        p1 * (c(s1 + s2, 2.0 * s2) + c(s2, 0.0)) + p2 * c(s2, 0.0),
    ];
    let rho = [c(s1, s1), c(s1, s2)];
    let rho_hat = [c(s2, s1), c(s2, s2)];
    // Smallest index wins ties.
    let i_star = if mu[0] >= mu[1] - 1e-15 { 0 } else { 1 };
    let j_star = if mu_hat[0] >= mu_hat[1] - 1e-15 { 0 } else { 1 };
    let b3 = q1 * rho[i_star] + q2 * rho_hat[j_star];
    let b4 = p1 * mu[i_star] + p2 * mu_hat[j_star];
    let b5 = q1 * c(s1, 0.0) + q2 * c(s2, 0.0);
    let b6 = p11 * c(s1, s1) + p12 * c(s2, s1) + p21 * c(s1, s2) + p22 * c(s2, s2);
    let b7 = p11 * c(s1, s1) + p21 * c(s2, s1) + p12 * c(s1, s2) + p22 * c(s2, s2);
    let (b1_12, b1_22) = (split_x.0, split_x.1);
    let f1 = q1 * c(s1, 0.0)
        + q2 * (c(s2 * b1_12, s1 + s2 * b1_22) + c(s2 * b1_22, 0.0));
    let f2 = p11 * c(2.0 * s1, 0.0) + (p12 + p21) * c(s1 + s2, 0.0) + p22 * c(2.0 * s2, 0.0)
        - f1;
    Ok(CornerPoints {
        t: (0.0, b1),
        u: (b2, b1),
        v: (b7, b1),
        w: (b3, b4),
        x: (f1, f2),
        y: (b5, b6),
        z: (b5, 0.0),
        i_star: i_star + 1,
        j_star: j_star + 1,
    })
}
