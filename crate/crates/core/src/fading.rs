//! Fading-power laws shared by every model module.
//!
//! A [`FadingLaw`] bundles the CDF, PDF and PDF slope of a nonnegative
//! power gain together with its support and mean. Laws are immutable
//! after construction and cheap to clone.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::numerics::{self, Bracket, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FadingError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Continuous fading-power distribution.
#[derive(Clone)]
pub struct FadingLaw {
    name: String,
    cdf: ScalarFn,
    pdf: ScalarFn,
    /// Analytic PDF derivative when available; otherwise central differences.
    dpdf: Option<ScalarFn>,
    support: (f64, f64),
    mean: f64,
}

impl fmt::Debug for FadingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FadingLaw")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("mean", &self.mean)
            .finish()
    }
}

impl FadingLaw {
    /// Exponential power gain (Rayleigh amplitude fading) with the given mean.
    pub fn rayleigh(mean: f64) -> Result<Self, FadingError> {
        if !(mean > 0.0) {
            return Err(FadingError::InvalidParameter(format!(
                "rayleigh mean must be positive, got {mean}"
            )));
        }
        let m = mean;
        Ok(FadingLaw {
            name: format!("rayleigh(mean={m})"),
            cdf: Arc::new(move |u| if u <= 0.0 { 0.0 } else { 1.0 - (-u / m).exp() }),
            pdf: Arc::new(move |u| if u < 0.0 { 0.0 } else { (-u / m).exp() / m }),
            dpdf: Some(Arc::new(move |u| if u < 0.0 { 0.0 } else { -(-u / m).exp() / (m * m) })),
            support: (0.0, f64::INFINITY),
            mean,
        })
    }

    /// Total power gain over `n` receive antennas with i.i.d. Rayleigh
    /// branches: density ∝ λ^{n-1} e^{-λ} with normalization 1/Γ(n).
    pub fn chi2_simo(n: usize) -> Result<Self, FadingError> {
        if n < 1 {
            return Err(FadingError::InvalidParameter("antenna count must be >= 1".into()));
        }
        if n == 1 {
            return Self::rayleigh(1.0);
        }
        let fact: f64 = (1..n).map(|k| k as f64).product(); // (n-1)!
        let nf = n;
        let pdf = move |u: f64| {
            if u < 0.0 {
                0.0
            } else {
                u.powi(nf as i32 - 1) * (-u).exp() / fact
            }
        };
        // Erlang CDF: 1 - e^{-u} sum_{k<n} u^k/k!
        let cdf = move |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let mut sum = 0.0;
            let mut term = 1.0;
            for k in 0..nf {
                if k > 0 {
                    term *= u / k as f64;
                }
                sum += term;
            }
            1.0 - (-u).exp() * sum
        };
        let dpdf = move |u: f64| {
            if u < 0.0 {
                0.0
            } else {
                ((nf as f64 - 1.0) * u.powi(nf as i32 - 2) - u.powi(nf as i32 - 1)) * (-u).exp()
                    / fact
            }
        };
        Ok(FadingLaw {
            name: format!("chi2_simo(n={n})"),
            cdf: Arc::new(cdf),
            pdf: Arc::new(pdf),
            dpdf: Some(Arc::new(dpdf)),
            support: (0.0, f64::INFINITY),
            mean: n as f64,
        })
    }

    /// Law defined by caller-supplied CDF and PDF closures. The PDF slope
    /// falls back to central differences when not supplied.
    pub fn from_fns(
        name: impl Into<String>,
        cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        pdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dpdf: Option<ScalarFn>,
        support: (f64, f64),
        mean: f64,
    ) -> Self {
        FadingLaw {
            name: name.into(),
            cdf: Arc::new(cdf),
            pdf: Arc::new(pdf),
            dpdf,
            support,
            mean,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cdf(&self, u: f64) -> f64 {
        (self.cdf)(u)
    }

    pub fn pdf(&self, u: f64) -> f64 {
        (self.pdf)(u)
    }

    /// PDF slope f'(u), analytic when available, else central differences
    /// with step 1e-5·max(1, u).
    pub fn pdf_deriv(&self, u: f64) -> f64 {
        match &self.dpdf {
            Some(d) => d(u),
            None => {
                let h = 1e-5 * u.abs().max(1.0);
                ((self.pdf)(u + h) - (self.pdf)(u - h)) / (2.0 * h)
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Upper quantile points used to truncate semi-infinite scans.
    pub fn quantile(&self, q: f64) -> f64 {
        let (lo, hi) = self.support;
        if self.cdf(lo) >= q {
            return lo;
        }
        let mut upper = if hi.is_finite() { hi } else { self.mean.max(1.0) };
        if !hi.is_finite() {
            while self.cdf(upper) < q && upper < 1e12 {
                upper *= 2.0;
            }
        }
        numerics::find_root(
            |u| self.cdf(u) - q,
            Bracket::new(lo, upper),
            Tolerance { abs_tol: 1e-12, ..Default::default() },
        )
        .unwrap_or(upper)
    }

    /// Inverse-CDF sampling, reproducible for a given seed.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = self.support;
        (0..count)
            .map(|_| {
                let u: f64 = rng.gen();
                if self.name.starts_with("rayleigh") {
                    // Direct inverse keeps million-draw oracles fast.
                    return lo.max(-self.mean * (1.0 - u).ln());
                }
                let mut upper = if hi.is_finite() { hi } else { self.mean.max(1.0) };
                if !hi.is_finite() {
                    while self.cdf(upper) < u && upper < 1e12 {
                        upper *= 2.0;
                    }
                }
                numerics::find_root(
                    |x| self.cdf(x) - u,
                    Bracket::new(lo, upper),
                    Tolerance { abs_tol: 1e-10, ..Default::default() },
                )
                .unwrap_or(upper)
            })
            .collect()
    }

    /// Checks the law invariants and reports diagnostics instead of failing.
    pub fn validate(&self) -> ValidationReport {
        let mut failures = Vec::new();
        let tol = Tolerance { abs_tol: 1e-9, rel_tol: 1e-9, ..Default::default() };
        let (lo, hi) = self.support;

        // Normalization up to a far-tail quantile; vast supports with
        // concentrated mass would otherwise defeat the quadrature grid.
        let q_hi = self.quantile(1.0 - 1e-9);
        let upper = if hi.is_finite() { hi.min(q_hi.max(lo + 1e-12)) } else { q_hi };
        let total = numerics::integrate(|u| self.pdf(u), lo, upper, tol).unwrap_or(f64::NAN);
        let expected_mass = self.cdf(upper);
        if !((total - expected_mass).abs() <= 1e-6 && expected_mass >= 1.0 - 1e-6) {
            failures.push(format!(
                "pdf normalization: integral to the 1-1e-9 quantile = {total}, cdf there = {expected_mass}"
            ));
        }
        let mut prev = self.cdf(lo);
        if prev.abs() > 1e-9 {
            failures.push(format!("cdf at support lower edge = {prev}, expected 0"));
        }
        for i in 1..=20 {
            let u = lo + (upper - lo) * i as f64 / 20.0;
            let c = self.cdf(u);
            if c + 1e-12 < prev {
                failures.push(format!("cdf not monotone near u = {u}"));
                break;
            }
            prev = c;
            if self.pdf(u) < -1e-12 {
                failures.push(format!("pdf negative at u = {u}"));
                break;
            }
            let integral = numerics::integrate(|x| self.pdf(x), lo, u, tol).unwrap_or(f64::NAN);
            if (integral - c).abs() > 1e-6 {
                failures.push(format!("cdf mismatch at u = {u}: F = {c}, ∫f = {integral}"));
                break;
            }
        }

        // Slope consistency against central differences of the PDF. The
        // step follows the law's own scale so laws living on a narrow
        // support are differenced inside it.
        if self.dpdf.is_some() {
            let width = upper - lo;
            for i in 1..10 {
                let u = lo + width * i as f64 / 10.0;
                let h = (1e-5 * u.abs().max(1.0)).min(1e-4 * width);
                let fd = (self.pdf(u + h) - self.pdf(u - h)) / (2.0 * h);
                let an = self.pdf_deriv(u);
                let scale = an.abs().max(fd.abs()).max(1e-8);
                if (an - fd).abs() / scale > 1e-4 {
                    failures.push(format!("pdf slope mismatch at u = {u}: {an} vs {fd}"));
                    break;
                }
            }
        }

        ValidationReport { failures }
    }
}

/// Result of [`FadingLaw::validate`]; empty failure list means pass.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Finite-state gain distribution with strictly ascending positive levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteStates {
    levels: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteStates {
    pub fn new(levels: Vec<f64>, probs: Vec<f64>) -> Result<Self, FadingError> {
        if levels.is_empty() || levels.len() != probs.len() {
            return Err(FadingError::InvalidParameter(
                "levels and probs must be nonempty and equal length".into(),
            ));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) || levels[0] <= 0.0 {
            return Err(FadingError::InvalidParameter(
                "levels must be strictly ascending and positive".into(),
            ));
        }
        if probs.iter().any(|&p| p < 0.0) {
            return Err(FadingError::InvalidParameter("probabilities must be nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(FadingError::InvalidParameter(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(DiscreteStates { levels, probs })
    }

    /// Single state with probability one.
    pub fn point_mass(level: f64) -> Result<Self, FadingError> {
        Self::new(vec![level], vec![1.0])
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// P(gain >= levels[i]).
    pub fn tail_prob(&self, i: usize) -> f64 {
        self.probs[i..].iter().sum()
    }

    pub fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (lv, p) in self.levels.iter().zip(&self.probs) {
                    acc += p;
                    if u <= acc {
                        return *lv;
                    }
                }
                *self.levels.last().unwrap()
            })
            .collect()
    }

    /// Conservative discretization of a continuous law: each cell's mass
    /// is assigned to its left edge, so every state can genuinely sustain
    /// the rates designed for its level. The last cell absorbs the tail.
    pub fn discretize_left_edges(law: &FadingLaw, cells: usize, upper: f64) -> Self {
        assert!(cells >= 1 && upper > 0.0);
        let mut levels = Vec::with_capacity(cells);
        let mut probs = Vec::with_capacity(cells);
        for i in 0..cells {
            let a = upper * i as f64 / cells as f64;
            let b = upper * (i + 1) as f64 / cells as f64;
            levels.push(if i == 0 { 1e-9 } else { a });
            probs.push(if i + 1 == cells { 1.0 - law.cdf(a) } else { law.cdf(b) - law.cdf(a) });
        }
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        DiscreteStates { levels, probs }
    }
}

/// Transmit SNR wrapper; linear and dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub snr: f64,
}

impl ChannelConfig {
    pub fn new(snr: f64) -> Result<Self, FadingError> {
        if !(snr > 0.0) {
            return Err(FadingError::InvalidParameter(format!("SNR must be positive, got {snr}")));
        }
        Ok(ChannelConfig { snr })
    }
}
