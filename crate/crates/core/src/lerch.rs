//! Uniqueness checks: exact equality of transforms, the integer-abscissa
//! sampling criterion, the vanishing-moment zero test and the `x = e^(−t)`
//! change of variables behind it.

use num_complex::Complex64;

use crate::algebra::c;
use crate::error::{Error, Result};
use crate::laplace::{transform, LaplaceExpr};
use crate::oracle::{gauss_legendre, integrate_composite, numeric_laplace, QuadratureConfig};
use crate::timefun::TimeExpr;

/// Tolerance on delays and on cross-multiplied coefficients.
pub const EQUALITY_TOL: f64 = 1e-9;
/// Largest gap at which sampled transforms still count as equal.
pub const SAMPLE_TOL: f64 = 1e-6;
pub const MAX_PROJECTION_DEGREE: usize = 64;
const MOMENT_TOL: f64 = 1e-9;
const MOMENT_PANELS: usize = 64;
const LOG_PANELS: usize = 30;

/// Result of [`lerch_sample_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceVerdict {
    pub exact_equal: bool,
    pub sampled_equal: bool,
    pub sample_points: Vec<Complex64>,
    pub max_sample_gap: f64,
    pub threshold_n: f64,
}

/// Result of [`moment_zero_test`]. `certified_l2_bound` is `None` when some
/// moment is too large for the certificate to apply.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub interval: (f64, f64),
    pub max_degree: usize,
    pub moments: Vec<f64>,
    pub residual_l2: f64,
    pub certified_l2_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSubstitution {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
}

/// Uniformly sampled function on `[a, b]`, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub a: f64,
    pub b: f64,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument("need at least two samples".into()));
        }
        if !(a < b) {
            return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
        }
        Ok(Self { a, b, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len() - 1;
        let pos = ((x - self.a) / (self.b - self.a) * n as f64).clamp(0.0, n as f64);
        let i = (pos.floor() as usize).min(n - 1);
        let frac = pos - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

/// Exact equality of two transforms: equal delays and, per delay,
/// `num_F·den_G = num_G·den_F` coefficientwise.
pub fn transform_equal(f: &LaplaceExpr, g: &LaplaceExpr) -> bool {
    if f.terms().len() != g.terms().len() {
        return false;
    }
    f.terms().iter().zip(g.terms()).all(|(a, b)| {
        if (a.delay - b.delay).abs() > EQUALITY_TOL {
            return false;
        }
        let lhs = a.rf.num() * b.rf.den();
        let rhs = b.rf.num() * a.rf.den();
        let scale = lhs.max_abs_coeff().max(rhs.max_abs_coeff());
        let len = lhs.coeffs().len().max(rhs.coeffs().len());
        (0..len).all(|k| (lhs.coeff(k) - rhs.coeff(k)).norm() <= EQUALITY_TOL * scale)
    })
}

/// `floor(a + 1) + 1`, the smallest integer strictly above `a + 1`.
pub fn sampling_threshold(a: f64) -> f64 {
    (a + 1.0).floor() + 1.0
}

/// Compares the transforms of `f` and `g` at `s = N, N+1, …, N+count−1` by
/// quadrature, with `N` the smallest integer above both growth exponents plus one.
pub fn lerch_sample_check(f: &TimeExpr, g: &TimeExpr, count: usize) -> Result<EquivalenceVerdict> {
    lerch_sample_check_with_tol(f, g, count, SAMPLE_TOL)
}

pub fn lerch_sample_check_with_tol(
    f: &TimeExpr,
    g: &TimeExpr,
    count: usize,
    tol: f64,
) -> Result<EquivalenceVerdict> {
    if count < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 samples, got {count}")));
    }
    let a = f.growth_bound().a.max(g.growth_bound().a);
    let threshold_n = sampling_threshold(a);
    let cfg = QuadratureConfig::default();
    let sample_points: Vec<Complex64> = (0..count).map(|k| c(threshold_n + k as f64)).collect();
    let mut max_sample_gap: f64 = 0.0;
    for &s in &sample_points {
        let gap = (numeric_laplace(f, s, &cfg)? - numeric_laplace(g, s, &cfg)?).norm();
        max_sample_gap = max_sample_gap.max(gap);
    }
    Ok(EquivalenceVerdict {
        exact_equal: transform_equal(&transform(f), &transform(g)),
        sampled_equal: max_sample_gap <= tol,
        sample_points,
        max_sample_gap,
        threshold_n,
    })
}

fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(x);
    }
    for k in 2..=n {
        let next = ((2 * k - 1) as f64 * x * p[k - 1] - (k - 1) as f64 * p[k - 2]) / k as f64;
        p.push(next);
    }
    p
}

/// Moments `∫ₐᵇ xⁿφ(x)dx` for `n ≤ K`, the degree-K Legendre projection
/// residual, and an L² bound on `φ` when all moments vanish.
///
/// If every moment up to K is zero then `∫φ² = ∫φ(φ − p)` for the projection
/// `p`, so `‖φ‖ ≤ ‖φ − p‖`.
pub fn moment_zero_test(phi: impl Fn(f64) -> f64, a: f64, b: f64, k: usize) -> Result<MomentReport> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
    }
    if k > MAX_PROJECTION_DEGREE {
        return Err(Error::DegreeCap(k));
    }
    let rule = gauss_legendre(16);
    let width = b - a;
    let to_ref = |x: f64| (2.0 * x - a - b) / width;
    let integrate = |g: &dyn Fn(f64) -> f64| {
        integrate_composite(|x| c(g(x)), a, b, MOMENT_PANELS, &rule).re
    };

    let moments: Vec<f64> = (0..=k)
        .map(|n| integrate(&|x: f64| x.powi(n as i32) * phi(x)))
        .collect();

    let coeffs: Vec<f64> = (0..=k)
        .map(|j| {
            (2 * j + 1) as f64 / width * integrate(&|x: f64| phi(x) * legendre_values(j, to_ref(x))[j])
        })
        .collect();
    let projection = |x: f64| -> f64 {
        legendre_values(k, to_ref(x))
            .iter()
            .zip(&coeffs)
            .map(|(p, c)| p * c)
            .sum()
    };
    let residual_l2 = integrate(&|x: f64| (phi(x) - projection(x)).powi(2))
        .max(0.0)
        .sqrt();

    let sup = (0..=1000)
        .map(|i| a + width * i as f64 / 1000.0)
        .chain((0..MOMENT_PANELS).flat_map(|p| {
            let h = width / MOMENT_PANELS as f64;
            let lo = a + p as f64 * h;
            rule.0.iter().map(move |x| lo + 0.5 * h * (1.0 + x)).collect::<Vec<_>>()
        }))
        .map(|x| phi(x).abs())
        .fold(0.0, f64::max);
    let tol = MOMENT_TOL * width * sup;
    let certified_l2_bound = moments.iter().all(|m| m.abs() <= tol).then_some(residual_l2);

    Ok(MomentReport {
        interval: (a, b),
        max_degree: k,
        moments,
        residual_l2,
        certified_l2_bound,
    })
}

/// Compares `∫₀^∞ h(t)e^(−nt)dt` with `∫₀¹ h(−ln x)x^(n−1)dx`.
///
/// The right-hand side uses geometric panels `[2^(−j−1), 2^(−j)]` toward the
/// logarithmic singularity at 0 plus a final `[0, 2^(−30)]` panel; nodes never
/// touch the endpoints.
pub fn log_substitution_check(h: &TimeExpr, n: u32) -> Result<LogSubstitution> {
    let limit = h.growth_bound().a + 1.0;
    if !(n as f64 > limit) {
        return Err(Error::OutsideConvergence {
            re: n as f64,
            limit,
        });
    }
    let cfg = QuadratureConfig::default();
    let lhs = numeric_laplace(h, c(n as f64), &cfg)?;

    let rule = gauss_legendre(16);
    let integrand = |x: f64| h.eval(-x.ln()).unwrap_or_default() * x.powi(n as i32 - 1);
    let mut edges: Vec<f64> = (0..=LOG_PANELS).map(|j| 0.5f64.powi(j as i32)).collect();
    edges.push(0.0);
    edges.extend(h.onsets().into_iter().filter(|&s| s > 0.0).map(|s| (-s).exp()));
    edges.sort_by(|x, y| y.total_cmp(x));
    edges.dedup();

    let mut rhs = c(0.0);
    for w in edges.windows(2) {
        rhs += integrate_composite(integrand, w[1], w[0], 4, &rule);
    }
    Ok(LogSubstitution {
        lhs,
        rhs,
        gap: (lhs - rhs).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Polynomial, RationalFunction};
    use crate::laplace::inverse;

    fn lx(n: &[f64], d: &[f64]) -> LaplaceExpr {
        LaplaceExpr::rational(
            RationalFunction::new(Polynomial::from_real(n), Polynomial::from_real(d)).unwrap(),
        )
    }

    #[test]
    fn transform_equal_examples() {
        assert!(transform_equal(&lx(&[1.0], &[1.0, 1.0]), &lx(&[2.0, 1.0], &[2.0, 3.0, 1.0])));
        assert!(!transform_equal(&lx(&[1.0], &[0.0, 1.0]), &lx(&[1.0], &[1.0, 1.0])));
        let step = lx(&[1.0], &[0.0, 1.0]);
        assert!(!transform_equal(&step.delay(1.0).unwrap(), &step));
    }

    #[test]
    fn threshold_is_strict() {
        assert_eq!(sampling_threshold(-1.0 + 1e-6), 1.0);
        assert_eq!(sampling_threshold(0.0), 2.0);
        assert_eq!(sampling_threshold(1.5), 3.0);
    }

    #[test]
    fn sample_check_identical() {
        let f = TimeExpr::exp(c(-1.0));
        let v = lerch_sample_check(&f, &f, 5).unwrap();
        assert!(v.sampled_equal && v.exact_equal);
        assert!(v.max_sample_gap <= 1e-6);
        assert_eq!(v.threshold_n, 1.0);
        assert_eq!(v.sample_points.len(), 5);
    }

    #[test]
    fn sample_check_detects_small_perturbation() {
        let f = TimeExpr::exp(c(-1.0));
        let g = &f + &TimeExpr::exp(c(-2.0)).scale(c(0.01));
        let v = lerch_sample_check(&f, &g, 5).unwrap();
        assert!(!v.sampled_equal && !v.exact_equal);
        // largest gap is at s = N = 1: 0.01/(N + 2)
        assert!((v.max_sample_gap - 0.01 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn sample_check_roundtrip() {
        let f = &TimeExpr::step(0.0) - &TimeExpr::exp(c(-1.0));
        let g = inverse(&lx(&[1.0], &[0.0, 1.0, 1.0])).unwrap();
        let v = lerch_sample_check(&f, &g, 4).unwrap();
        assert!(v.sampled_equal && v.exact_equal);
        assert!(lerch_sample_check(&f, &g, 2).is_err());
    }

    #[test]
    fn moments_of_zero() {
        let r = moment_zero_test(|_| 0.0, 0.0, 1.0, 4).unwrap();
        assert!(r.moments.iter().all(|m| *m == 0.0));
        assert_eq!(r.certified_l2_bound, Some(0.0));
    }

    #[test]
    fn moments_of_linear() {
        let r = moment_zero_test(|x| x - 0.5, 0.0, 1.0, 1).unwrap();
        assert!(r.moments[0].abs() < 1e-15);
        assert!((r.moments[1] - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(r.certified_l2_bound, None);
    }

    #[test]
    fn moments_of_shifted_legendre() {
        // P₃(2x − 1)
        let p3 = |x: f64| {
            let u = 2.0 * x - 1.0;
            0.5 * (5.0 * u * u * u - 3.0 * u)
        };
        let r = moment_zero_test(p3, 0.0, 1.0, 2).unwrap();
        for m in &r.moments {
            assert!(m.abs() < 1e-14);
        }
        let norm = (1.0f64 / 7.0).sqrt();
        let bound = r.certified_l2_bound.expect("moments vanish");
        assert!((bound - norm).abs() < 1e-12);
    }

    #[test]
    fn moment_errors() {
        assert!(moment_zero_test(|x| x, 1.0, 1.0, 2).is_err());
        assert_eq!(moment_zero_test(|x| x, 0.0, 1.0, 65), Err(Error::DegreeCap(65)));
    }

    #[test]
    fn sampled_function_interpolates() {
        let f = SampledFunction::new(0.0, 2.0, vec![0.0, 1.0, 4.0]).unwrap();
        assert_eq!(f.eval(0.5), 0.5);
        assert_eq!(f.eval(1.5), 2.5);
        assert_eq!(f.eval(2.0), 4.0);
    }

    #[test]
    fn log_substitution_examples() {
        let r = log_substitution_check(&TimeExpr::step(0.0), 2).unwrap();
        assert!((r.lhs - c(0.5)).norm() < 1e-9 && (r.rhs - c(0.5)).norm() < 1e-9);
        let r = log_substitution_check(&TimeExpr::exp(c(-1.0)), 3).unwrap();
        assert!((r.lhs - c(0.25)).norm() < 1e-9 && (r.rhs - c(0.25)).norm() < 1e-9);
        let r = log_substitution_check(&TimeExpr::monomial(c(1.0), 1, c(-1.0)), 4).unwrap();
        assert!((r.lhs - c(1.0 / 25.0)).norm() < 1e-9);
        assert!((r.rhs - c(1.0 / 25.0)).norm() < 1e-9);
        assert!(r.gap <= 1e-6);
        assert!(log_substitution_check(&TimeExpr::exp(c(1.0)), 2).is_err());
    }
}
