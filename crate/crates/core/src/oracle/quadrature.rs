use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::timefun::TimeExpr;

/// Required margin between `Re s` and the growth exponent.
const CONVERGENCE_MARGIN: f64 = 0.1;
/// Largest `|rate|·h` per panel, where `rate` bounds the integrand's complex frequency.
const MAX_PHASE_PER_PANEL: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Minimum number of panels over the truncated interval.
    pub panel_count: usize,
    pub nodes_per_panel: usize,
    /// Bound on the neglected tail `∫_T^∞`.
    pub tail_tol: f64,
    /// Multiplies the final panel count; 2 halves every panel width.
    pub refinement: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            panel_count: 64,
            nodes_per_panel: 16,
            tail_tol: 1e-10,
            refinement: 1,
        }
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Compensated complex accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: Complex64,
    comp: Complex64,
}

impl KahanSum {
    pub fn add(&mut self, x: Complex64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> Complex64 {
        self.sum
    }
}

/// Composite Gauss–Legendre over `[a, b]` with `panels` equal panels.
pub fn integrate_composite(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    panels: usize,
    rule: &(Vec<f64>, Vec<f64>),
) -> Complex64 {
    let (nodes, weights) = rule;
    let h = (b - a) / panels as f64;
    let mut acc = KahanSum::default();
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut panel = Complex64::new(0.0, 0.0);
        for (x, w) in nodes.iter().zip(weights) {
            panel += f(mid + 0.5 * h * x) * *w;
        }
        acc.add(panel * (0.5 * h));
    }
    acc.value()
}

/// `∫_X^∞ uⁿe^(−κu)du = e^(−κX)·Σₖ n!/k!·Xᵏ/κ^(n−k+1)` for `X ≥ 0`, `κ > 0`.
fn upper_gamma_tail(n: u32, kappa: f64, x: f64) -> f64 {
    let mut term = 1.0 / kappa.powi(n as i32 + 1) * (1..=n).map(|k| k as f64).product::<f64>();
    let mut sum = 0.0;
    // k = 0 term is n!/κ^(n+1); each next term multiplies by X·κ/(k)
    for k in 0..=n {
        if k > 0 {
            term *= x * kappa / k as f64;
        }
        sum += term;
    }
    (-kappa * x).exp() * sum
}

/// Bound on `∫_T^∞ |f(t)e^(−st)| dt` from the individual modes.
fn mode_tail(f: &TimeExpr, s: Complex64, t: f64) -> f64 {
    f.modes()
        .iter()
        .map(|m| {
            let kappa = s.re - m.exponent.re;
            let x = (t - m.shift).max(0.0);
            m.amplitude.norm() * (-s.re * m.shift).exp()
                * upper_gamma_tail(m.power, kappa, x)
        })
        .sum()
}

/// `∫₀^∞ f(t)e^(−st) dt` by truncated composite Gauss–Legendre quadrature.
///
/// The truncation point satisfies the exponential-order tail bound
/// `M·e^((a−Re s)T)/(Re s − a) ≤ tail_tol` and the exact per-mode tail bound.
/// Panels break at every gate onset.
pub fn numeric_laplace(f: &TimeExpr, s: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let bound = f.growth_bound();
    let limit = bound.a + CONVERGENCE_MARGIN;
    if !(s.re > limit) {
        return Err(Error::OutsideConvergence { re: s.re, limit });
    }
    if f.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let sigma = s.re - bound.a;
    let mut t_end = ((bound.m / (sigma * cfg.tail_tol)).ln() / sigma).max(1.0);
    let last_onset = f.onsets().last().copied().unwrap_or(0.0);
    t_end = t_end.max(last_onset + 1.0);
    while mode_tail(f, s, t_end) > cfg.tail_tol {
        t_end *= 1.25;
    }

    let rate = f
        .modes()
        .iter()
        .map(|m| (s - m.exponent).norm())
        .fold(1.0, f64::max);
    let panels = (cfg.panel_count as f64)
        .max((t_end * rate / MAX_PHASE_PER_PANEL).ceil()) as usize
        * cfg.refinement.max(1);

    let mut breaks: Vec<f64> = std::iter::once(0.0)
        .chain(f.onsets().into_iter().filter(|&a| a > 0.0 && a < t_end))
        .collect();
    breaks.push(t_end);

    let rule = gauss_legendre(cfg.nodes_per_panel);
    let integrand = |t: f64| f.eval(t).unwrap_or_default() * (-s * t).exp();
    let mut acc = KahanSum::default();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let share = (((hi - lo) / t_end) * panels as f64).ceil().max(1.0) as usize;
        acc.add(integrate_composite(integrand, lo, hi, share, &rule));
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(16);
        assert!((rule.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // ∫ x^30 over [−1, 1] = 2/31
        let v: f64 = rule.0.iter().zip(&rule.1).map(|(x, w)| w * x.powi(30)).sum();
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
        let odd = gauss_legendre(5);
        assert!(odd.0[2].abs() < 1e-15);
    }

    #[test]
    fn decaying_exponential() {
        let v = numeric_laplace(&TimeExpr::exp(c(-1.0)), c(2.0), &QuadratureConfig::default())
            .unwrap();
        assert!((v - c(1.0 / 3.0)).norm() < 1e-8);
    }

    #[test]
    fn unit_step() {
        let v = numeric_laplace(&TimeExpr::step(0.0), c(1.0), &QuadratureConfig::default()).unwrap();
        assert!((v - c(1.0)).norm() < 1e-8);
    }

    #[test]
    fn shifted_step_and_precondition() {
        let v = numeric_laplace(&TimeExpr::step(2.0), c(1.5), &QuadratureConfig::default()).unwrap();
        let exact = (-3.0f64).exp() / 1.5;
        assert!((v - c(exact)).norm() < 1e-10);
        let err = numeric_laplace(&TimeExpr::step(0.0), c(0.05), &QuadratureConfig::default());
        assert!(matches!(err, Err(Error::OutsideConvergence { .. })));
    }

    #[test]
    fn tail_formula_matches_quadrature() {
        // ∫_2^∞ u² e^(−3u) du
        let rule = gauss_legendre(16);
        let direct = integrate_composite(|u| c(u * u * (-3.0 * u).exp()), 2.0, 40.0, 200, &rule);
        assert!((upper_gamma_tail(2, 3.0, 2.0) - direct.re).abs() < 1e-14);
    }
}
