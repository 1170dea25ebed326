//! Shared numerical kernels: special functions, bracketed root finding,
//! adaptive quadrature and derivative-free maximization.
//!
//! Everything here is pure and allocation-light; the model modules build
//! their closed forms and solvers on top of these primitives.

use thiserror::Error;

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no sign change over [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("did not converge within {0} iterations")]
    MaxIterations(usize),
    #[error("quadrature did not reach requested tolerance (estimate {estimate}, error {error})")]
    NonConvergence { estimate: f64, error: f64 },
    #[error("dimension {got} exceeds supported maximum {max}")]
    Dimension { got: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Convergence knobs shared by the iterative routines.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_tol: 1e-10, rel_tol: 1e-9, max_iter: 200 }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Self {
        assert!(abs_tol > 0.0 && rel_tol > 0.0 && max_iter >= 1, "invalid tolerance");
        Tolerance { abs_tol, rel_tol, max_iter }
    }
}

/// Root-finding interval with a sign change of the target function.
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "bracket requires lo < hi");
        Bracket { lo, hi }
    }
}

/// Principal branch of the Lambert-W function, the inverse of `w * exp(w)`.
///
/// Defined for `x >= -1/e`; returns `w >= -1`. Newton iteration from
/// `ln(1 + x)` on the nonnegative axis; on `[-1/e, 0)` the monotone branch
/// is bisected first and polished with Newton steps.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let lower = -(-1.0f64).exp(); // -1/e
    if !x.is_finite() {
        return Err(NumericsError::Domain(format!("lambert_w0 argument {x} not finite")));
    }
    if x < lower * (1.0 + 1e-12) - 1e-300 {
        return Err(NumericsError::Domain(format!("lambert_w0 argument {x} below -1/e")));
    }
    let x = x.max(lower);
    if x == 0.0 {
        return Ok(0.0);
    }

    let mut w = if x >= 0.0 {
        (1.0 + x).ln()
    } else {
        // w * e^w is increasing on [-1, 0]; bisect to a decent start.
        let (mut a, mut b) = (-1.0f64, 0.0f64);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if m * m.exp() > x {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    };

    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        let df = ew * (1.0 + w);
        if df.abs() < 1e-300 {
            break;
        }
        let step = f / df;
        w -= step;
        if w < -1.0 {
            w = -1.0;
        }
        if step.abs() <= 1e-14 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// Exponential integral E1(x) = ∫_x^∞ e^{-t}/t dt for x > 0.
///
/// Series expansion below 1, modified-Lentz continued fraction above.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(NumericsError::Domain(format!("E1 requires x > 0, got {x}")));
    }
    if x <= 1.0 {
        // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
        let mut sum = 0.0f64;
        let mut term = 1.0f64;
        for k in 1..200 {
            let kf = k as f64;
            term *= -x / kf;
            let contrib = -term / kf;
            sum += contrib;
            if contrib.abs() < 1e-18 * (1.0 + sum.abs()) {
                break;
            }
        }
        Ok(-EULER_GAMMA - x.ln() + sum)
    } else {
        // Continued fraction e^{-x} * 1/(x+1- 1/(x+3- 4/(x+5- 9/(...))))
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..200u32 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok(h * (-x).exp())
    }
}

/// Bracketed scalar root via Brent's method.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, bracket: Bracket, tol: Tolerance) -> Result<f64> {
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumericsError::NoSignChange { lo: a, hi: b, flo: fa, fhi: fb });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = b - a;
    for _ in 0..tol.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol.abs_tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation / secant.
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0)),
                    (q0 - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
    }
    Err(NumericsError::MaxIterations(tol.max_iter))
}

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

fn kronrod_15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut result_k = WGK[7] * fc;
    let mut result_g = WG[3] * fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let fsum = f(mid - x) + f(mid + x);
        result_k += WGK[j] * fsum;
        if j % 2 == 1 {
            result_g += WG[j / 2] * fsum;
        }
    }
    result_k *= half;
    result_g *= half;
    ((result_k), (result_k - result_g).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// `b` may be `f64::INFINITY`; the tail is folded onto `[0, 1)` with the
/// substitution `t = a + u/(1-u)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b.is_infinite() {
        let mut g = |u: f64| {
            let om = 1.0 - u;
            if om <= 0.0 {
                return 0.0;
            }
            let t = a + u / om;
            let v = f(t) / (om * om);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        return integrate_finite(&mut g, 0.0, 1.0, tol);
    }
    integrate_finite(&mut f, a, b, tol)
}

fn integrate_finite<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    // Worst-interval-first refinement over a fixed budget of subdivisions.
    struct Seg {
        a: f64,
        b: f64,
        val: f64,
        err: f64,
    }
    let (v, e) = kronrod_15(f, a, b);
    let mut segs = vec![Seg { a, b, val: v, err: e }];
    let max_segments = 4096usize;
    loop {
        let total: f64 = segs.iter().map(|s| s.val).sum();
        let err: f64 = segs.iter().map(|s| s.err).sum();
        let target = tol.abs_tol.max(tol.rel_tol * total.abs());
        if err <= target {
            return Ok(total);
        }
        if segs.len() >= max_segments {
            // Accept a slightly loose estimate rather than failing outright
            // when it is within a few orders of the request.
            if err <= 1e3 * target {
                return Ok(total);
            }
            return Err(NumericsError::NonConvergence { estimate: total, error: err });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .unwrap();
        let Seg { a: sa, b: sb, .. } = segs.swap_remove(worst);
        let m = 0.5 * (sa + sb);
        let (v1, e1) = kronrod_15(f, sa, m);
        let (v2, e2) = kronrod_15(f, m, sb);
        segs.push(Seg { a: sa, b: m, val: v1, err: e1 });
        segs.push(Seg { a: m, b: sb, val: v2, err: e2 });
    }
}

/// Golden-section maximization of a scalar function on `[lo, hi]`.
///
/// A coarse scan locates the best bucket first, so mildly multimodal
/// objectives (clamped closed forms and the like) land on the global
/// optimum of the scan resolution.
pub fn maximize_scalar<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: Tolerance,
) -> (f64, f64) {
    assert!(lo < hi, "maximize_scalar requires lo < hi");
    let scan_points = 128usize;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    let step = (hi - lo) / scan_points as f64;
    for i in 0..=scan_points {
        let x = lo + step * i as f64;
        let v = f(x);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = lo + step * (best_i.saturating_sub(1)) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);

    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..tol.max_iter {
        if (b - a).abs() <= tol.abs_tol.max(tol.rel_tol * (a.abs() + b.abs())) {
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
    let xm = 0.5 * (a + b);
    let fm = f(xm);
    if fm >= f1 && fm >= f2 {
        (xm, fm)
    } else if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Derivative-free maximization over a box, dimension ≤ 8.
///
/// Golden section in 1-D; Nelder-Mead with deterministic multi-start
/// otherwise. Returns the best point found and its value.
pub fn maximize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    lower: &[f64],
    upper: &[f64],
    tol: Tolerance,
) -> Result<(Vec<f64>, f64)> {
    let dim = lower.len();
    assert_eq!(dim, upper.len(), "bound length mismatch");
    if dim == 0 || dim > 8 {
        return Err(NumericsError::Dimension { got: dim, max: 8 });
    }
    if dim == 1 {
        let (x, v) = maximize_scalar(|x| f(&[x]), lower[0], upper[0], tol);
        return Ok((vec![x], v));
    }

    let clamp = |x: &mut [f64]| {
        for ((xi, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
            *xi = xi.clamp(*lo, *hi);
        }
    };

    // Deterministic LCG for restart points; reproducibility matters more
    // than statistical quality here.
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut unit = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64) / ((1u64 << 53) as f64)
    };

    let n_starts = 8 + 4 * dim;
    let mut best_x = vec![0.0; dim];
    let mut best_v = f64::NEG_INFINITY;
    for start in 0..n_starts {
        let mut x0: Vec<f64> = (0..dim)
            .map(|i| {
                let u = if start == 0 { 0.5 } else { unit() };
                lower[i] + u * (upper[i] - lower[i])
            })
            .collect();
        clamp(&mut x0);
        let (x, v) = nelder_mead(&mut f, &x0, lower, upper, tol);
        if v > best_v {
            best_v = v;
            best_x = x;
        }
    }
    Ok((best_x, best_v))
}

fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    tol: Tolerance,
) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let clamp = |x: &mut Vec<f64>| {
        for i in 0..dim {
            x[i] = x[i].clamp(lower[i], upper[i]);
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        let span = upper[i] - lower[i];
        p[i] += if p[i] + 0.1 * span <= upper[i] { 0.1 * span } else { -0.1 * span };
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    let max_iter = tol.max_iter * 10;
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap());
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];
        if (values[best] - values[worst]).abs()
            <= tol.abs_tol.max(tol.rel_tol * values[best].abs())
        {
            break;
        }
        // Centroid of all but the worst point.
        let mut centroid = vec![0.0; dim];
        for (k, p) in simplex.iter().enumerate() {
            if k == worst {
                continue;
            }
            for i in 0..dim {
                centroid[i] += p[i] / dim as f64;
            }
        }
        let mut reflect: Vec<f64> =
            (0..dim).map(|i| centroid[i] + (centroid[i] - simplex[worst][i])).collect();
        clamp(&mut reflect);
        let fr = f(&reflect);
        if fr > values[best] {
            let mut expand: Vec<f64> =
                (0..dim).map(|i| centroid[i] + 2.0 * (centroid[i] - simplex[worst][i])).collect();
            clamp(&mut expand);
            let fe = f(&expand);
            if fe > fr {
                simplex[worst] = expand;
                values[worst] = fe;
            } else {
                simplex[worst] = reflect;
                values[worst] = fr;
            }
        } else if fr > values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = fr;
        } else {
            let mut contract: Vec<f64> =
                (0..dim).map(|i| centroid[i] + 0.5 * (simplex[worst][i] - centroid[i])).collect();
            clamp(&mut contract);
            let fc = f(&contract);
            if fc > values[worst] {
                simplex[worst] = contract;
                values[worst] = fc;
            } else {
                // Shrink towards the best vertex.
                let best_p = simplex[best].clone();
                for (k, p) in simplex.iter_mut().enumerate() {
                    if k == best {
                        continue;
                    }
                    for i in 0..dim {
                        p[i] = best_p[i] + 0.5 * (p[i] - best_p[i]);
                    }
                    values[k] = f(p);
                }
            }
        }
    }
    let (k, _) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    (simplex[k].clone(), values[k])
}
