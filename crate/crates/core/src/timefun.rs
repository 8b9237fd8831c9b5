//! Exponential-polynomial signals: finite sums of gated modes
//! `c·(t−a)ⁿ·e^(λ(t−a))` that are active for `t ≥ a`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::algebra::{c, factorial};
use crate::error::{Error, Result};

/// Slack added to the growth exponent to absorb polynomial factors.
pub const GROWTH_SLACK: f64 = 1e-6;
const MERGE_TOL: f64 = 1e-12;

/// `amplitude·(t − shift)^power·e^(exponent·(t − shift))` for `t ≥ shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub amplitude: Complex64,
    pub power: u32,
    pub exponent: Complex64,
    pub shift: f64,
}

impl Mode {
    pub fn new(amplitude: Complex64, power: u32, exponent: Complex64, shift: f64) -> Self {
        Self {
            amplitude,
            power,
            exponent,
            shift,
        }
    }

    /// Value of the ungated smooth part at `t`.
    fn smooth_value(&self, t: f64) -> Complex64 {
        let tau = t - self.shift;
        self.amplitude * tau.powi(self.power as i32) * (self.exponent * tau).exp()
    }

    fn same_slot(&self, other: &Mode) -> bool {
        self.power == other.power
            && (self.shift - other.shift).abs() <= MERGE_TOL * (1.0 + self.shift.abs())
            && (self.exponent - other.exponent).norm() <= MERGE_TOL * (1.0 + self.exponent.norm())
    }
}

/// Exponential-order certificate `|f(t)| ≤ m·e^(a·t)` for `t ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBound {
    pub m: f64,
    pub a: f64,
}

/// Canonical sum of modes: sorted by `(shift, exponent, power)`, at most one
/// mode per slot, no zero amplitudes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeExpr {
    modes: Vec<Mode>,
}

impl TimeExpr {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        for m in &modes {
            if !(m.shift >= 0.0) || !m.shift.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "mode shift must be finite and nonnegative, got {}",
                    m.shift
                )));
            }
            if !m.amplitude.is_finite() || !m.exponent.is_finite() {
                return Err(Error::InvalidArgument("non-finite mode parameter".into()));
            }
        }
        Ok(Self::canonical(modes))
    }

    fn canonical(raw: Vec<Mode>) -> Self {
        let mut merged: Vec<Mode> = Vec::with_capacity(raw.len());
        for m in raw {
            if let Some(slot) = merged.iter_mut().find(|x| x.same_slot(&m)) {
                slot.amplitude += m.amplitude;
            } else {
                merged.push(m);
            }
        }
        merged.retain(|m| m.amplitude != c(0.0));
        merged.sort_by(|a, b| {
            a.shift
                .total_cmp(&b.shift)
                .then(a.exponent.re.total_cmp(&b.exponent.re))
                .then(a.exponent.im.total_cmp(&b.exponent.im))
                .then(a.power.cmp(&b.power))
        });
        Self { modes: merged }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Unit step switched on at `shift`.
    pub fn step(shift: f64) -> Self {
        Self::single(Mode::new(c(1.0), 0, c(0.0), shift))
    }

    /// `e^(λt)`
    pub fn exp(exponent: Complex64) -> Self {
        Self::single(Mode::new(c(1.0), 0, exponent, 0.0))
    }

    /// `amplitude·tⁿ·e^(λt)`
    pub fn monomial(amplitude: Complex64, power: u32, exponent: Complex64) -> Self {
        Self::single(Mode::new(amplitude, power, exponent, 0.0))
    }

    /// `cos(ωt)` as a conjugate pair.
    pub fn cos(omega: f64) -> Self {
        Self::canonical(vec![
            Mode::new(c(0.5), 0, Complex64::new(0.0, omega), 0.0),
            Mode::new(c(0.5), 0, Complex64::new(0.0, -omega), 0.0),
        ])
    }

    /// `sin(ωt)` as a conjugate pair.
    pub fn sin(omega: f64) -> Self {
        let half = Complex64::new(0.0, -0.5);
        Self::canonical(vec![
            Mode::new(half, 0, Complex64::new(0.0, omega), 0.0),
            Mode::new(-half, 0, Complex64::new(0.0, -omega), 0.0),
        ])
    }

    fn single(mode: Mode) -> Self {
        Self::canonical(vec![mode])
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn has_shifts(&self) -> bool {
        self.modes.iter().any(|m| m.shift != 0.0)
    }

    /// Distinct gate onsets, ascending.
    pub fn onsets(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.modes.iter().map(|m| m.shift).collect();
        out.dedup();
        out
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.eval_gated(t, |shift| shift <= t))
    }

    /// Left limit at `t`: gates opening exactly at `t` are still closed.
    pub(crate) fn eval_left(&self, t: f64) -> Complex64 {
        self.eval_gated(t, |shift| shift < t)
    }

    fn eval_gated(&self, t: f64, open: impl Fn(f64) -> bool) -> Complex64 {
        self.modes
            .iter()
            .filter(|m| open(m.shift))
            .map(|m| m.smooth_value(t))
            .sum()
    }

    /// Termwise derivative of the smooth parts, keeping the gates. Valid away
    /// from the onsets.
    pub(crate) fn smooth_derivative(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.modes.len());
        for m in &self.modes {
            out.push(Mode::new(m.amplitude * m.exponent, m.power, m.exponent, m.shift));
            if m.power > 0 {
                out.push(Mode::new(
                    m.amplitude * m.power as f64,
                    m.power - 1,
                    m.exponent,
                    m.shift,
                ));
            }
        }
        Self::canonical(out)
    }

    /// d/dt of an ungated expression.
    pub fn derivative(&self) -> Result<Self> {
        if self.has_shifts() {
            return Err(Error::GatedDerivative);
        }
        Ok(self.smooth_derivative())
    }

    /// `∫₀ᵗ f(τ) dτ`, again an exponential polynomial. Gated modes integrate
    /// from their onset.
    pub fn running_integral(&self) -> Self {
        let mut out = Vec::new();
        for m in &self.modes {
            let n = m.power;
            let lambda = m.exponent;
            if lambda.norm() == 0.0 {
                out.push(Mode::new(m.amplitude / (n + 1) as f64, n + 1, lambda, m.shift));
                continue;
            }
            // ∫₀^τ uⁿe^(λu)du = e^(λτ)·Σₖ (−1)ᵏ n!/((n−k)! λ^(k+1)) τ^(n−k) − (−1)ⁿ n!/λ^(n+1)
            let nf = factorial(n as usize);
            for k in 0..=n {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let coeff = sign * nf / factorial((n - k) as usize) / lambda.powu(k + 1);
                out.push(Mode::new(m.amplitude * coeff, n - k, lambda, m.shift));
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            out.push(Mode::new(
                -m.amplitude * sign * nf / lambda.powu(n + 1),
                0,
                c(0.0),
                m.shift,
            ));
        }
        Self::canonical(out)
    }

    /// `e^(b·t)·f(t)`
    pub fn multiply_exp(&self, b: Complex64) -> Self {
        Self::canonical(
            self.modes
                .iter()
                .map(|m| {
                    Mode::new(
                        m.amplitude * (b * m.shift).exp(),
                        m.power,
                        m.exponent + b,
                        m.shift,
                    )
                })
                .collect(),
        )
    }

    /// `f(k·t)` for `k > 0`.
    pub fn scale_time(&self, k: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::InvalidArgument(format!("time scale must be positive, got {k}")));
        }
        Ok(Self::canonical(
            self.modes
                .iter()
                .map(|m| {
                    Mode::new(
                        m.amplitude * k.powi(m.power as i32),
                        m.power,
                        m.exponent * k,
                        m.shift / k,
                    )
                })
                .collect(),
        ))
    }

    /// `f(t − delay)·u(t − delay)`
    pub fn delay(&self, delay: f64) -> Result<Self> {
        if !(delay >= 0.0) {
            return Err(Error::InvalidArgument(format!("delay must be nonnegative, got {delay}")));
        }
        Ok(Self::canonical(
            self.modes
                .iter()
                .map(|m| Mode { shift: m.shift + delay, ..*m })
                .collect(),
        ))
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::canonical(
            self.modes
                .iter()
                .map(|m| Mode { amplitude: m.amplitude * k, ..*m })
                .collect(),
        )
    }

    /// Exponential-order certificate. The exponent is the largest real part
    /// plus [`GROWTH_SLACK`]; the constant is the supremum of
    /// `|f(t)|·e^(−a·t)` over the grid `t = 0, 0.01, …, 100`, padded by a few
    /// ulps so that `m·e^(a·t)` still covers `|f(t)|` after rounding.
    pub fn growth_bound(&self) -> GrowthBound {
        if self.is_zero() {
            return GrowthBound { m: 1.0, a: 0.0 };
        }
        let a = self
            .modes
            .iter()
            .map(|m| m.exponent.re)
            .fold(f64::NEG_INFINITY, f64::max)
            + GROWTH_SLACK;
        let m = growth_grid()
            .map(|t| self.eval_gated(t, |shift| shift <= t).norm() * (-a * t).exp())
            .fold(0.0, f64::max);
        GrowthBound {
            m: if m > 0.0 { m * (1.0 + 8.0 * f64::EPSILON) } else { f64::MIN_POSITIVE },
            a,
        }
    }

    /// Mode-for-mode comparison of canonical forms. Modes with amplitude at
    /// most `tol` are ignored.
    pub fn equal(&self, other: &Self, tol: f64) -> bool {
        let lhs: Vec<&Mode> = self.modes.iter().filter(|m| m.amplitude.norm() > tol).collect();
        let rhs: Vec<&Mode> = other.modes.iter().filter(|m| m.amplitude.norm() > tol).collect();
        if lhs.len() != rhs.len() {
            return false;
        }
        let mut used = vec![false; rhs.len()];
        lhs.iter().all(|a| {
            let hit = rhs.iter().enumerate().position(|(j, b)| {
                !used[j]
                    && a.power == b.power
                    && (a.shift - b.shift).abs() <= tol
                    && (a.exponent - b.exponent).norm() <= tol
                    && (a.amplitude - b.amplitude).norm() <= tol
            });
            match hit {
                Some(j) => {
                    used[j] = true;
                    true
                }
                None => false,
            }
        })
    }

    /// Largest `|Im f(t)|` over the given times, for signals that should be real.
    pub fn max_imag(&self, times: impl IntoIterator<Item = f64>) -> f64 {
        times
            .into_iter()
            .map(|t| self.eval_gated(t, |shift| shift <= t).im.abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn growth_grid() -> impl Iterator<Item = f64> {
    (0..=10_000).map(|k| k as f64 * 0.01)
}

impl Add for &TimeExpr {
    type Output = TimeExpr;
    fn add(self, rhs: &TimeExpr) -> TimeExpr {
        TimeExpr::canonical(self.modes.iter().chain(&rhs.modes).copied().collect())
    }
}

impl Sub for &TimeExpr {
    type Output = TimeExpr;
    fn sub(self, rhs: &TimeExpr) -> TimeExpr {
        self + &rhs.scale(c(-1.0))
    }
}

impl Neg for &TimeExpr {
    type Output = TimeExpr;
    fn neg(self) -> TimeExpr {
        self.scale(c(-1.0))
    }
}

impl Mul<Complex64> for &TimeExpr {
    type Output = TimeExpr;
    fn mul(self, k: Complex64) -> TimeExpr {
        self.scale(k)
    }
}
