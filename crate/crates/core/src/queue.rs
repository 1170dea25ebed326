//! Zero-padding-queue delay analysis for layered transmission: K-layer and
//! continuum bounds on the stationary queue plus a Lindley-recursion
//! simulator used as the oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fading::FadingLaw;
use crate::numerics::{self, Tolerance};
use crate::siso::{self, LayeringProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueueError {
    #[error("unstable queue: arrival rate {lambda} >= mean service {mean_service}")]
    Unstable { lambda: f64, mean_service: f64 },
    #[error("invalid service law: {0}")]
    InvalidService(String),
}

/// Per-layer service description: cumulative decodable rates and the
/// probability of each decoding outcome.
///
/// With probability `layer_probs[i-1]` the decoded amount is the cumulative
/// rate `Re_{K-i+1}` (index 1 pairs with the full stack), and with the
/// complementary outage probability nothing is decoded.
#[derive(Debug, Clone)]
pub struct QueueServiceLaw {
    cumulative_rates: Vec<f64>,
    layer_probs: Vec<f64>,
    outage_prob: f64,
}

impl QueueServiceLaw {
    pub fn new(cumulative_rates: Vec<f64>, layer_probs: Vec<f64>) -> Result<Self, QueueError> {
        if cumulative_rates.is_empty() || cumulative_rates.len() != layer_probs.len() {
            return Err(QueueError::InvalidService(
                "rates and probabilities must be nonempty and equal length".into(),
            ));
        }
        if cumulative_rates[0] < 0.0 || cumulative_rates.windows(2).any(|w| w[0] > w[1]) {
            return Err(QueueError::InvalidService(
                "cumulative rates must be nonnegative ascending".into(),
            ));
        }
        let total: f64 = layer_probs.iter().sum();
        if layer_probs.iter().any(|&p| p < 0.0) || total > 1.0 + 1e-12 {
            return Err(QueueError::InvalidService("invalid probability vector".into()));
        }
        Ok(QueueServiceLaw {
            cumulative_rates,
            layer_probs,
            outage_prob: (1.0 - total).max(0.0),
        })
    }

    /// Build from per-layer incremental rates.
    pub fn from_layer_rates(rates: &[f64], layer_probs: Vec<f64>) -> Result<Self, QueueError> {
        let mut cum = Vec::with_capacity(rates.len());
        let mut acc = 0.0;
        for &r in rates {
            acc += r;
            cum.push(acc);
        }
        Self::new(cum, layer_probs)
    }

    pub fn layer_count(&self) -> usize {
        self.cumulative_rates.len()
    }

    pub fn outage_prob(&self) -> f64 {
        self.outage_prob
    }

    /// Service value drawn with probability `layer_probs[i]`: the top
    /// cumulative rate for i = 0, down to a single layer for i = K-1.
    fn service_value(&self, i: usize) -> f64 {
        let k = self.cumulative_rates.len();
        self.cumulative_rates[k - 1 - i]
    }

    /// Mean decoded rate Σ p_i Re_{K-i+1}.
    pub fn mean_service(&self) -> f64 {
        self.layer_probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * self.service_value(i))
            .sum()
    }

    /// Service-rate variance Σ p_i Re_{K-i+1}^2 - mean^2.
    pub fn service_variance(&self) -> f64 {
        let mean = self.mean_service();
        let second: f64 = self
            .layer_probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * self.service_value(i).powi(2))
            .sum();
        second - mean * mean
    }

    /// Deterministic sampler of service realizations.
    pub fn sampler(&self, seed: u64) -> impl FnMut() -> f64 + '_ {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        move || {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (i, p) in self.layer_probs.iter().enumerate() {
                acc += p;
                if u <= acc {
                    return self.service_value(i);
                }
            }
            0.0
        }
    }
}

/// Stationary queue-size bounds; the analytic lower bound can dip below
/// zero for extreme parameters, in which case it is clamped and flagged.
#[derive(Debug, Clone, Copy)]
pub struct QueueBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_clamped: bool,
}

/// Expected queue-size bounds for K-layer coding.
pub fn k_layer_queue_bounds(svc: &QueueServiceLaw, lambda: f64) -> Result<QueueBounds, QueueError> {
    assert!(lambda > 0.0, "arrival rate must be positive");
    let mean = svc.mean_service();
    if lambda >= mean {
        return Err(QueueError::Unstable { lambda, mean_service: mean });
    }
    let top = *svc.cumulative_rates.last().unwrap();
    let spread: f64 = svc
        .layer_probs
        .iter()
        .enumerate()
        .map(|(i, p)| p * (top - svc.service_value(i)).powi(2))
        .sum::<f64>()
        + svc.outage_prob * top * top;
    let drift = mean - lambda;
    let lower_raw =
        ((top - lambda) * drift - (top - lambda).powi(2) + spread) / (2.0 * drift);
    let upper =
        (2.0 * (top - lambda) * drift - (top - lambda).powi(2) + spread) / (2.0 * drift);
    Ok(QueueBounds {
        lower: lower_raw.max(0.0),
        upper,
        lower_clamped: lower_raw < 0.0,
    })
}

/// Expected-delay upper bound for K-layer coding (variance form).
pub fn k_layer_delay_ub(svc: &QueueServiceLaw, lambda: f64) -> Result<f64, QueueError> {
    assert!(lambda > 0.0, "arrival rate must be positive");
    let mean = svc.mean_service();
    if lambda >= mean {
        return Err(QueueError::Unstable { lambda, mean_service: mean });
    }
    let var = svc.service_variance();
    Ok(var / (2.0 * lambda * (mean - lambda)) - (1.0 - lambda / mean) * var / (2.0 * mean * lambda))
}

/// Continuum-layering statistics feeding the queue corollaries.
#[derive(Debug, Clone, Copy)]
pub struct ContinuumServiceStats {
    /// Total layered rate R_T = R(s1).
    pub total_rate: f64,
    /// Expected decoded rate R_bs.
    pub mean_rate: f64,
    /// Mean squared undecoded remainder E[(R_T - R(s))^2].
    pub deficit_second_moment: f64,
    /// Var[R(s)].
    pub rate_variance: f64,
}

pub fn continuum_service_stats(profile: &LayeringProfile, law: &FadingLaw) -> ContinuumServiceStats {
    let total_rate = siso::cumulative_rate(profile, profile.s1);
    let mean_rate = siso::expected_rate(profile, law);
    let tol = Tolerance { abs_tol: 1e-11, rel_tol: 1e-9, ..Default::default() };
    let (lo, hi) = law.support();
    let deficit_second_moment = numerics::integrate(
        |u| law.pdf(u) * (total_rate - siso::cumulative_rate(profile, u)).powi(2),
        lo,
        hi,
        tol,
    )
    .unwrap();
    let second_moment = numerics::integrate(
        |u| law.pdf(u) * siso::cumulative_rate(profile, u).powi(2),
        lo,
        hi,
        tol,
    )
    .unwrap();
    ContinuumServiceStats {
        total_rate,
        mean_rate,
        deficit_second_moment,
        rate_variance: second_moment - mean_rate * mean_rate,
    }
}

/// Queue-size bounds for continuum layering.
pub fn continuum_queue_bounds(
    profile: &LayeringProfile,
    law: &FadingLaw,
    lambda: f64,
) -> Result<QueueBounds, QueueError> {
    let stats = continuum_service_stats(profile, law);
    continuum_queue_bounds_from_stats(&stats, lambda)
}

pub fn continuum_queue_bounds_from_stats(
    stats: &ContinuumServiceStats,
    lambda: f64,
) -> Result<QueueBounds, QueueError> {
    assert!(lambda > 0.0, "arrival rate must be positive");
    if lambda >= stats.mean_rate {
        return Err(QueueError::Unstable { lambda, mean_service: stats.mean_rate });
    }
    let rt = stats.total_rate;
    let drift = stats.mean_rate - lambda;
    let lower_raw = (rt - lambda) / 2.0
        + (stats.deficit_second_moment - (rt - lambda).powi(2)) / (2.0 * drift);
    let upper =
        (rt - lambda) + (stats.deficit_second_moment - (rt - lambda).powi(2)) / (2.0 * drift);
    Ok(QueueBounds { lower: lower_raw.max(0.0), upper, lower_clamped: lower_raw < 0.0 })
}

/// Expected-delay upper bound for continuum layering (variance form).
pub fn continuum_delay_ub(
    profile: &LayeringProfile,
    law: &FadingLaw,
    lambda: f64,
) -> Result<f64, QueueError> {
    let stats = continuum_service_stats(profile, law);
    assert!(lambda > 0.0, "arrival rate must be positive");
    if lambda >= stats.mean_rate {
        return Err(QueueError::Unstable { lambda, mean_service: stats.mean_rate });
    }
    let var = stats.rate_variance;
    let mean = stats.mean_rate;
    Ok(var / (2.0 * lambda * (mean - lambda)) - (1.0 - lambda / mean) * var / (2.0 * mean * lambda))
}

/// Lindley recursion w_{n+1} = max(0, w_n + lambda - R_n) with the first 1%
/// of steps discarded as warm-up. Returns (mean queue, mean delay).
pub fn simulate_lindley(
    mut service: impl FnMut() -> f64,
    lambda: f64,
    n_steps: usize,
) -> (f64, f64) {
    assert!(n_steps >= 1);
    let warmup = n_steps / 100;
    let mut w = 0.0f64;
    let mut acc = 0.0f64;
    let mut counted = 0usize;
    for n in 0..n_steps {
        w = (w + lambda - service()).max(0.0);
        if n >= warmup {
            acc += w;
            counted += 1;
        }
    }
    let mean_queue = acc / counted as f64;
    (mean_queue, mean_queue / lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_layer() -> QueueServiceLaw {
        QueueServiceLaw::from_layer_rates(&[0.5, 0.5], vec![0.4, 0.4]).unwrap()
    }

    #[test]
    fn service_law_bookkeeping() {
        let svc = two_layer();
        assert_eq!(svc.layer_count(), 2);
        assert!((svc.outage_prob() - 0.2).abs() < 1e-15);
        // p_1 = 0.4 pairs with Re_2 = 1.0, p_2 = 0.4 with Re_1 = 0.5.
        assert!((svc.mean_service() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn bounds_ordered_and_contain_simulation() {
        let svc = two_layer();
        let lambda = 0.3;
        let b = k_layer_queue_bounds(&svc, lambda).unwrap();
        assert!(b.lower <= b.upper);
        let mut sample = svc.sampler(99);
        let (mean_queue, _) = simulate_lindley(&mut sample, lambda, 1_000_000);
        assert!(
            mean_queue >= b.lower - 0.02 && mean_queue <= b.upper + 0.02,
            "simulated {mean_queue} outside [{}, {}]",
            b.lower,
            b.upper
        );
    }

    #[test]
    fn instability_detected() {
        let svc = two_layer();
        assert!(matches!(
            k_layer_queue_bounds(&svc, 0.7),
            Err(QueueError::Unstable { .. })
        ));
        assert!(k_layer_delay_ub(&svc, 0.61).is_err());
    }

    #[test]
    fn small_lambda_limits_finite() {
        let svc = two_layer();
        let b = k_layer_queue_bounds(&svc, 1e-6).unwrap();
        assert!(b.lower >= 0.0 && b.upper.is_finite());
        let d = k_layer_delay_ub(&svc, 1e-6).unwrap();
        assert!(d.is_finite() && d >= 0.0);
    }

    #[test]
    fn deterministic_service_bounds() {
        // Single always-decoded layer: spread = variance = 0.
        let svc = QueueServiceLaw::new(vec![1.0], vec![1.0]).unwrap();
        let b = k_layer_queue_bounds(&svc, 0.5).unwrap();
        assert!(b.lower <= b.upper);
        let d = k_layer_delay_ub(&svc, 0.5).unwrap();
        assert!(d.abs() < 1e-15, "zero-variance bound should vanish, got {d}");
        // Bound diverges approaching the stability edge.
        let svc2 = two_layer();
        let near = k_layer_delay_ub(&svc2, 0.5999).unwrap();
        let far = k_layer_delay_ub(&svc2, 0.3).unwrap();
        assert!(near > 100.0 * far);
    }

    #[test]
    fn delay_bound_dominates_simulation() {
        let svc = two_layer();
        let lambda = 0.3;
        let d_ub = k_layer_delay_ub(&svc, lambda).unwrap();
        let mut sample = svc.sampler(7);
        let (_, mean_delay) = simulate_lindley(&mut sample, lambda, 1_000_000);
        assert!(mean_delay <= d_ub + 0.02, "{mean_delay} > {d_ub}");
    }

    #[test]
    fn lindley_degenerate_cases() {
        // Service exactly matching arrivals keeps the queue at zero.
        let (q, _) = simulate_lindley(|| 0.5, 0.5, 10_000);
        assert_eq!(q, 0.0);
        // Never decoding grows linearly: mean over time ≈ lambda * n / 2.
        let n = 100_000usize;
        let lambda = 0.25;
        let (q, _) = simulate_lindley(|| 0.0, lambda, n);
        let expect = lambda * n as f64 / 2.0;
        assert!((q - expect).abs() / expect < 0.02, "{q} vs {expect}");
    }

    #[test]
    fn lindley_matches_reflected_walk_stationary_mean() {
        // lambda = 1, service 2 w.p. p else 0: reflected random walk with
        // stationary mean (1-p)/(2p-1).
        let p = 0.75;
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let svc = move || if rng.gen::<f64>() < p { 2.0 } else { 0.0 };
        let (q, _) = simulate_lindley(svc, 1.0, 10_000_000);
        let analytic = (1.0 - p) / (2.0 * p - 1.0);
        assert!((q - analytic).abs() / analytic < 0.02, "{q} vs {analytic}");
    }

    #[test]
    fn continuum_bounds_contain_simulation() {
        let law = FadingLaw::rayleigh(1.0).unwrap();
        let profile = siso::optimal_profile(&law, 10.0).unwrap();
        let stats = continuum_service_stats(&profile, &law);
        let lambda = 0.5 * stats.mean_rate;
        let b = continuum_queue_bounds_from_stats(&stats, lambda).unwrap();
        assert!(b.lower <= b.upper);

        // Deficit second moment two ways: direct vs partial integration
        // 2 ∫ F(u) dR(u) (R_T - R(u)) du.
        let tol = Tolerance { abs_tol: 1e-12, rel_tol: 1e-10, ..Default::default() };
        let alt = numerics::integrate(
            |u| {
                let i = profile.residual_interference(u);
                let dr = u * profile.power_density(u) / (1.0 + u * i);
                2.0 * law.cdf(u) * dr * (stats.total_rate - siso::cumulative_rate(&profile, u))
            },
            profile.s0,
            profile.s1,
            tol,
        )
        .unwrap();
        assert!(
            (alt - stats.deficit_second_moment).abs() < 1e-8,
            "{alt} vs {}",
            stats.deficit_second_moment
        );

        // Simulate with service drawn by sampling the fading law.
        let draws = law.sample(1_000_000, 31);
        let mut idx = 0;
        let s0 = profile.s0;
        let svc = move || {
            let s = draws[idx];
            idx += 1;
            // Rayleigh closed-form cumulative rate keeps this fast.
            if s <= s0 {
                0.0
            } else if s >= 1.0 {
                -2.0 * s0.ln() - (1.0 - s0)
            } else {
                2.0 * (s / s0).ln() - (s - s0)
            }
        };
        let (q, _) = simulate_lindley(svc, lambda, 1_000_000);
        assert!(
            q >= b.lower - 0.05 && q <= b.upper + 0.05,
            "simulated {q} outside [{}, {}]",
            b.lower,
            b.upper
        );

        let d_ub = continuum_delay_ub(&profile, &law, lambda).unwrap();
        assert!(d_ub > 0.0 && d_ub.is_finite());
    }

    #[test]
    fn invalid_service_rejected() {
        assert!(QueueServiceLaw::new(vec![1.0, 0.5], vec![0.5, 0.5]).is_err());
        assert!(QueueServiceLaw::new(vec![0.5, 1.0], vec![0.8, 0.8]).is_err());
        assert!(QueueServiceLaw::new(vec![], vec![]).is_err());
    }
}
