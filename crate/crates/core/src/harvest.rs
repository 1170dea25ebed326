//! Broadcast approach with an energy-harvesting transmitter: per-block
//! layering utilities plus the exact staircase power allocation over
//! blocks (dominant-constraint partitioning).

use std::cell::RefCell;
use std::collections::HashMap;

use thiserror::Error;

use crate::fading::FadingLaw;
use crate::numerics::{self, Bracket, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarvestError {
    #[error("invalid harvest profile: {0}")]
    InvalidProfile(String),
    #[error("budget must be nonnegative, got {0}")]
    NegativeBudget(f64),
}

/// Per-slot harvested energy and the cumulative budgets it induces.
#[derive(Debug, Clone)]
pub struct HarvestProfile {
    /// gamma[b] = total energy harvested up to and including block b.
    pub gamma: Vec<f64>,
}

impl HarvestProfile {
    /// From per-block, per-slot harvest amounts.
    pub fn from_slots(g: &[Vec<f64>]) -> Result<Self, HarvestError> {
        if g.is_empty() {
            return Err(HarvestError::InvalidProfile("no blocks".into()));
        }
        let mut gamma = Vec::with_capacity(g.len());
        let mut acc = 0.0;
        for block in g {
            if block.iter().any(|&e| e < 0.0) {
                return Err(HarvestError::InvalidProfile("negative harvest".into()));
            }
            acc += block.iter().sum::<f64>();
            gamma.push(acc);
        }
        Ok(HarvestProfile { gamma })
    }

    pub fn from_cumulative(gamma: Vec<f64>) -> Result<Self, HarvestError> {
        if gamma.is_empty() || gamma[0] < 0.0 || gamma.windows(2).any(|w| w[0] > w[1]) {
            return Err(HarvestError::InvalidProfile(
                "cumulative budgets must be nonnegative and non-decreasing".into(),
            ));
        }
        Ok(HarvestProfile { gamma })
    }
}

/// Expected rate of the optimal layering within one block at aggregate
/// power `p`, evaluated through the breakpoint identity
/// R = ln(u^2 f(u) / (l^2 f(l))) - ∫_l^u [2/s + f'/f] F ds.
pub fn block_rate(law: &FadingLaw, p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let (lower, upper) = match block_breakpoints(law, p) {
        Some(lu) => lu,
        None => return 0.0,
    };
    let head =
        (upper * upper * law.pdf(upper) / (lower * lower * law.pdf(lower))).ln();
    let tol = Tolerance { abs_tol: 1e-11, rel_tol: 1e-10, ..Default::default() };
    let tail = numerics::integrate(
        |s| (2.0 / s + law.pdf_deriv(s) / law.pdf(s)) * law.cdf(s),
        lower,
        upper,
        tol,
    )
    .unwrap_or(0.0);
    head - tail
}

/// Layering breakpoints (l_b, u_b) for one block: u_b solves the zero of
/// 1 - F - s f, l_b solves I(l_b) = p on the candidate interference.
pub fn block_breakpoints(law: &FadingLaw, p: f64) -> Option<(f64, f64)> {
    let hi = law.quantile(1.0 - 1e-12).max(4.0 * law.mean());
    let g = |x: f64| 1.0 - law.cdf(x) - x * law.pdf(x);
    // Upper breakpoint: first downward zero of g.
    let n = 2000;
    let mut bracket = None;
    let mut prev = (hi * 1e-9, g(hi * 1e-9));
    for i in 1..=n {
        let x = hi * i as f64 / n as f64;
        let v = g(x);
        if prev.1 > 0.0 && v <= 0.0 {
            bracket = Some((prev.0, x));
            break;
        }
        prev = (x, v);
    }
    let (a, b) = bracket?;
    let upper = numerics::find_root(g, Bracket::new(a, b), Tolerance::default()).ok()?;
    // Lower breakpoint: candidate interference equals p.
    let cand = |x: f64| (1.0 - law.cdf(x) - x * law.pdf(x)) / (x * x * law.pdf(x));
    let (mut lo, mut hi2) = (upper * 1e-9, upper);
    if cand(lo) <= p {
        return Some((lo, upper));
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi2);
        if cand(m) > p {
            lo = m;
        } else {
            hi2 = m;
        }
    }
    Some((0.5 * (lo + hi2), upper))
}

/// Strictly concave, non-decreasing block utility with a numerically
/// differentiated marginal. Evaluations are memoized because the
/// staircase algorithm revisits the same powers many times.
pub struct BlockUtility {
    law: FadingLaw,
    cache: RefCell<HashMap<u64, f64>>,
}

impl BlockUtility {
    pub fn new(law: FadingLaw) -> Self {
        BlockUtility { law, cache: RefCell::new(HashMap::new()) }
    }

    pub fn value(&self, p: f64) -> f64 {
        let key = p.to_bits();
        if let Some(&v) = self.cache.borrow().get(&key) {
            return v;
        }
        let v = block_rate(&self.law, p);
        self.cache.borrow_mut().insert(key, v);
        v
    }

    /// Marginal utility by central differences with step 1e-4 of the
    /// power (floored for small arguments).
    pub fn marginal(&self, p: f64) -> f64 {
        let h = 1e-4 * p.abs().max(1e-3);
        let lo = (p - h).max(0.0);
        (self.value(p + h) - self.value(lo)) / (p + h - lo)
    }
}

/// Equality-constrained equal-marginal allocation of `budget` across the
/// utilities (water-filling on the marginals by bisection).
pub fn solve_subproblem(utilities: &[&BlockUtility], budget: f64) -> Result<Vec<f64>, HarvestError> {
    if budget < 0.0 {
        return Err(HarvestError::NegativeBudget(budget));
    }
    let n = utilities.len();
    if n == 0 || budget == 0.0 {
        return Ok(vec![0.0; n]);
    }
    if n == 1 {
        return Ok(vec![budget]);
    }
    // Per-block power at marginal level mu, clipped at zero.
    let power_at = |u: &BlockUtility, mu: f64| -> f64 {
        if u.marginal(1e-9) <= mu {
            return 0.0;
        }
        let (mut lo, mut hi) = (1e-9, budget);
        if u.marginal(hi) >= mu {
            return hi;
        }
        for _ in 0..60 {
            let m = 0.5 * (lo + hi);
            if u.marginal(m) > mu {
                lo = m;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    };
    let total_at = |mu: f64| -> f64 { utilities.iter().map(|u| power_at(u, mu)).sum() };

    let mut mu_hi = utilities
        .iter()
        .map(|u| u.marginal(1e-9))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut mu_lo = utilities
        .iter()
        .map(|u| u.marginal(budget))
        .fold(f64::INFINITY, f64::min)
        .min(mu_hi * 0.5);
    // total_at is decreasing in mu; widen until it brackets the budget.
    for _ in 0..100 {
        if total_at(mu_lo) >= budget {
            break;
        }
        mu_lo *= 0.5;
        if mu_lo < 1e-300 {
            break;
        }
    }
    for _ in 0..100 {
        let mu = 0.5 * (mu_lo + mu_hi);
        if total_at(mu) > budget {
            mu_lo = mu;
        } else {
            mu_hi = mu;
        }
    }
    let mu = 0.5 * (mu_lo + mu_hi);
    let mut p: Vec<f64> = utilities.iter().map(|u| power_at(u, mu)).collect();
    // Distribute the bisection slack proportionally to stay exactly on
    // the budget.
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        for v in &mut p {
            *v *= budget / total;
        }
    } else {
        // All marginals tie at zero power; split evenly.
        for v in &mut p {
            *v = budget / n as f64;
        }
    }
    Ok(p)
}

/// Output of the staircase allocation: dominant constraint indices, their
/// marginal values, and the block powers.
#[derive(Debug, Clone)]
pub struct PartitionResult {
    /// 1-based indices of blocks whose cumulative constraint is tight.
    pub dominant: Vec<usize>,
    /// Marginal value per partition segment (strictly decreasing).
    pub marginals: Vec<f64>,
    pub powers: Vec<f64>,
    /// Set if a marginal tie forced the earliest-block rule.
    pub tie_broken: bool,
}

/// Staircase allocation over blocks: repeatedly solves the
/// equality-constrained subproblem up to each candidate end block, keeps
/// the candidate with the largest minimum marginal, and commits its
/// segment.
pub fn allocate_over_time(
    utilities: &[BlockUtility],
    harvest: &HarvestProfile,
) -> Result<PartitionResult, HarvestError> {
    let b_total = utilities.len();
    if harvest.gamma.len() != b_total {
        return Err(HarvestError::InvalidProfile(format!(
            "gamma has {} blocks, utilities {}",
            harvest.gamma.len(),
            b_total
        )));
    }
    if harvest.gamma.iter().any(|&g| g < 0.0) {
        return Err(HarvestError::InvalidProfile("negative budget".into()));
    }
    let gamma = &harvest.gamma;
    let gamma_at = |i: usize| if i == 0 { 0.0 } else { gamma[i - 1] };

    let mut powers = vec![0.0; b_total];
    let mut dominant = Vec::new();
    let mut marginals = Vec::new();
    let mut tie_broken = false;
    let mut u_prev = 0usize; // 1-based block index of the last committed end

    while u_prev < b_total {
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for b in (u_prev + 1)..=b_total {
            let budget = gamma_at(b) - gamma_at(u_prev);
            let group: Vec<&BlockUtility> = utilities[u_prev..b].iter().collect();
            let y = solve_subproblem(&group, budget)?;
            let q = y
                .iter()
                .zip(&group)
                .map(|(&p, u)| u.marginal(p))
                .fold(f64::INFINITY, f64::min);
            match &best {
                None => best = Some((b, q, y)),
                Some((_, q_best, _)) => {
                    if q > *q_best + 1e-9 {
                        best = Some((b, q, y));
                    } else if (q - *q_best).abs() <= 1e-9 {
                        // Earliest block wins ties; the incumbent already
                        // has the smaller index.
                        tie_broken = true;
                    }
                }
            }
        }
        let (u_d, v_d, z) = best.expect("candidate set nonempty");
        for (offset, &p) in z.iter().enumerate() {
            powers[u_prev + offset] = p;
        }
        dominant.push(u_d);
        marginals.push(v_d);
        u_prev = u_d;
    }

    Ok(PartitionResult { dominant, marginals, powers, tie_broken })
}

/// Full pipeline: per-block utilities from the fading laws, staircase
/// allocation over time, and the resulting total average rate.
pub fn end_to_end(
    laws: &[FadingLaw],
    harvest: &HarvestProfile,
) -> Result<(PartitionResult, f64), HarvestError> {
    let utilities: Vec<BlockUtility> =
        laws.iter().map(|law| BlockUtility::new(law.clone())).collect();
    let result = allocate_over_time(&utilities, harvest)?;
    let total = result
        .powers
        .iter()
        .zip(&utilities)
        .map(|(&p, u)| u.value(p))
        .sum();
    Ok((result, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::siso;

    fn rayleigh() -> FadingLaw {
        FadingLaw::rayleigh(1.0).unwrap()
    }

    #[test]
    fn block_rate_matches_expected_rate_formula() {
        let law = rayleigh();
        for &p in &[0.5, 2.0, 10.0, 100.0] {
            let via_breakpoints = block_rate(&law, p);
            let profile = siso::optimal_profile(&law, p).unwrap();
            let via_integral = siso::expected_rate(&profile, &law);
            assert!(
                (via_breakpoints - via_integral).abs() < 1e-8,
                "P={p}: {via_breakpoints} vs {via_integral}"
            );
        }
    }

    #[test]
    fn block_rate_small_power_vanishes() {
        let law = rayleigh();
        let r = block_rate(&law, 1e-9);
        assert!(r >= 0.0 && r < 1e-6);
        let (l, u) = block_breakpoints(&law, 1e-9).unwrap();
        assert!((l - u).abs() < 1e-3, "breakpoints should merge: {l} vs {u}");
    }

    #[test]
    fn block_rate_concave_increasing() {
        let law = rayleigh();
        let grid: Vec<f64> = (1..=40).map(|i| 0.5 * i as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|&p| block_rate(&law, p)).collect();
        for w in vals.windows(2) {
            assert!(w[1] > w[0], "rate must increase");
        }
        for w in vals.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] < 1e-9, "second difference positive");
        }
    }

    #[test]
    fn subproblem_symmetric_split() {
        let u1 = BlockUtility::new(rayleigh());
        let u2 = BlockUtility::new(rayleigh());
        let u3 = BlockUtility::new(rayleigh());
        let p = solve_subproblem(&[&u1, &u2, &u3], 9.0).unwrap();
        for &v in &p {
            assert!((v - 3.0).abs() < 1e-6, "{p:?}");
        }
        let single = solve_subproblem(&[&u1], 5.0).unwrap();
        assert_eq!(single, vec![5.0]);
        assert!(solve_subproblem(&[&u1], -1.0).is_err());
    }

    #[test]
    fn subproblem_matches_grid_oracle() {
        // Unequal laws so the split is nontrivial.
        let u1 = BlockUtility::new(FadingLaw::rayleigh(0.5).unwrap());
        let u2 = BlockUtility::new(rayleigh());
        let u3 = BlockUtility::new(FadingLaw::chi2_simo(2).unwrap());
        let budget = 12.0;
        let got = solve_subproblem(&[&u1, &u2, &u3], budget).unwrap();
        let obj =
            |a: f64, b: f64| u1.value(a) + u2.value(b) + u3.value(budget - a - b);
        // Progressive grid refinement around the incumbent.
        let mut best = (0.0, 0.0, f64::NEG_INFINITY);
        let mut center = (budget / 3.0, budget / 3.0);
        let mut span = budget / 2.0;
        for _ in 0..6 {
            for i in -12..=12 {
                for j in -12..=12 {
                    let a = (center.0 + span * i as f64 / 12.0).clamp(0.0, budget);
                    let b = (center.1 + span * j as f64 / 12.0).clamp(0.0, budget - a);
                    let v = obj(a, b);
                    if v > best.2 {
                        best = (a, b, v);
                    }
                }
            }
            center = (best.0, best.1);
            span /= 6.0;
        }
        let got_obj = obj(got[0], got[1]);
        assert!(
            (got_obj - best.2).abs() < 1e-5,
            "subproblem {got_obj} vs oracle {}",
            best.2
        );
    }

    #[test]
    fn single_block_takes_full_budget() {
        let laws = vec![rayleigh()];
        let harvest = HarvestProfile::from_cumulative(vec![7.5]).unwrap();
        let (result, total) = end_to_end(&laws, &harvest).unwrap();
        assert_eq!(result.powers, vec![7.5]);
        assert_eq!(result.dominant, vec![1]);
        assert!((total - block_rate(&laws[0], 7.5)).abs() < 1e-12);
    }

    #[test]
    fn constant_harvest_uniform_allocation() {
        let laws = vec![rayleigh(); 4];
        let harvest =
            HarvestProfile::from_slots(&[vec![2.0, 1.0], vec![3.0], vec![1.5, 1.5], vec![3.0]])
                .unwrap();
        let (result, _) = end_to_end(&laws, &harvest).unwrap();
        for &p in &result.powers {
            assert!((p - 3.0).abs() < 1e-6, "{:?}", result.powers);
        }
    }

    #[test]
    fn feasibility_and_dominant_equality() {
        let laws = vec![rayleigh(); 5];
        let harvest =
            HarvestProfile::from_cumulative(vec![1.0, 1.5, 6.0, 6.5, 12.0]).unwrap();
        let (result, _) = end_to_end(&laws, &harvest).unwrap();
        let mut acc = 0.0;
        for (b, &p) in result.powers.iter().enumerate() {
            acc += p;
            assert!(acc <= harvest.gamma[b] + 1e-8, "infeasible at block {b}");
        }
        for &u in &result.dominant {
            let used: f64 = result.powers[..u].iter().sum();
            assert!(
                (used - harvest.gamma[u - 1]).abs() <= 1e-8,
                "dominant constraint {u} not tight: {used} vs {}",
                harvest.gamma[u - 1]
            );
        }
        for w in result.marginals.windows(2) {
            assert!(w[0] > w[1] + 1e-9, "marginals not strictly decreasing: {w:?}");
        }
    }

    #[test]
    fn beats_equal_split() {
        let laws = vec![rayleigh(); 3];
        let harvest = HarvestProfile::from_cumulative(vec![9.0, 9.5, 10.0]).unwrap();
        let (_, total) = end_to_end(&laws, &harvest).unwrap();
        // Equal split of the final budget is infeasible here; compare with
        // the best feasible uniform prefix allocation instead.
        let uniform: f64 = 10.0 / 3.0;
        let feasible_uniform = uniform.min(9.0);
        let naive: f64 = (0..3).map(|_| block_rate(&laws[0], feasible_uniform)).sum();
        assert!(total >= naive - 1e-9, "{total} < {naive}");
    }

    #[test]
    fn equal_marginals_within_groups() {
        // Interior blocks of each partition segment share the segment's
        // marginal value.
        let laws = vec![rayleigh(); 5];
        let harvest =
            HarvestProfile::from_cumulative(vec![1.5, 2.0, 8.0, 8.6, 15.0]).unwrap();
        let utilities: Vec<BlockUtility> =
            laws.iter().map(|law| BlockUtility::new(law.clone())).collect();
        let result = allocate_over_time(&utilities, &harvest).unwrap();
        let mut start = 0usize;
        for (seg, &end) in result.dominant.iter().enumerate() {
            let v = result.marginals[seg];
            for b in start..end {
                if result.powers[b] > 1e-6 {
                    let m = utilities[b].marginal(result.powers[b]);
                    assert!(
                        (m - v).abs() <= 1e-7 * (1.0 + v.abs()),
                        "block {b}: marginal {m} vs segment value {v}"
                    );
                }
            }
            start = end;
        }
    }

    #[test]
    fn multi_segment_partitions_forced() {
        // Front-loaded then starved budgets force several dominant
        // constraints; each segment must stay feasible and tight.
        let laws = vec![rayleigh(); 5];
        let gamma = vec![10.0, 10.5, 11.0, 11.2, 25.0];
        let harvest = HarvestProfile::from_cumulative(gamma.clone()).unwrap();
        let (result, total) = end_to_end(&laws, &harvest).unwrap();
        assert!(result.dominant.len() >= 2, "expected a staircase, got {result:?}");
        let utilities: Vec<BlockUtility> =
            laws.iter().map(|law| BlockUtility::new(law.clone())).collect();
        let oracle = exhaustive_subset_best(&utilities, &gamma);
        assert!((total - oracle).abs() < 1e-5, "{total} vs {oracle}");
        // Decreasing segment marginals mean segment powers rise over
        // time for identical utilities (late energy cannot flow backward).
        for w in result.powers.windows(2) {
            assert!(w[1] + 1e-7 >= w[0], "{:?}", result.powers);
        }
    }

    #[test]
    fn staircase_matches_exhaustive_subset_oracle() {
        let mut lcg = 777u64;
        let mut unit = move || {
            lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((lcg >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for trial in 0..5 {
            let b = 3 + trial % 3; // 3..5 blocks
            let laws: Vec<FadingLaw> = (0..b).map(|_| rayleigh()).collect();
            let mut gamma = Vec::new();
            let mut acc = 0.0;
            for _ in 0..b {
                acc += 0.5 + 6.0 * unit();
                gamma.push(acc);
            }
            let harvest = HarvestProfile::from_cumulative(gamma.clone()).unwrap();
            let (result, total) = end_to_end(&laws, &harvest).unwrap();

            let utilities: Vec<BlockUtility> =
                laws.iter().map(|law| BlockUtility::new(law.clone())).collect();
            let oracle = exhaustive_subset_best(&utilities, &gamma);
            assert!(
                (total - oracle).abs() < 1e-5,
                "trial {trial}: staircase {total} vs oracle {oracle} (gamma {gamma:?}, powers {:?})",
                result.powers
            );
        }
    }

    /// Oracle: enumerate every subset of tight cumulative constraints
    /// (the final one is always tight), solve the equal-marginal problem
    /// per segment, filter infeasible candidates, take the best.
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
                match solve_subproblem(&group, budget) {
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
            let value: f64 =
                powers.iter().zip(utilities).map(|(&p, u)| u.value(p)).sum();
            best = best.max(value);
        }
        best
    }
}
