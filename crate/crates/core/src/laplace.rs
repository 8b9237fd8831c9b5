//! Symbolic Laplace transform over exponential-polynomial signals.
//!
//! A transform is a finite sum `Σ e^(−aᵢs)·Fᵢ(s)` of delay-tagged rational
//! functions. Every operation here maps that class to itself, so results can
//! be compared exactly (up to floating tolerance) rather than sampled.

use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use crate::algebra::{c, factorial, PartialFractions, PoleTerm, Polynomial, RationalFunction};
use crate::error::{Error, Result};
use crate::timefun::{Mode, TimeExpr};

const DELAY_MERGE_TOL: f64 = 1e-12;
const POLE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceTerm {
    pub delay: f64,
    pub rf: RationalFunction,
}

/// `Σᵢ e^(−delayᵢ·s)·rfᵢ(s)`, converging for `Re s > abscissa`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceExpr {
    terms: Vec<LaplaceTerm>,
    abscissa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Cosine,
    Sine,
}

impl LaplaceExpr {
    /// Groups terms by delay, drops zero terms and computes the abscissa.
    pub fn new(terms: Vec<LaplaceTerm>) -> Result<Self> {
        let mut grouped: Vec<LaplaceTerm> = Vec::with_capacity(terms.len());
        for term in terms {
            if !(term.delay >= 0.0) || !term.delay.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "delay must be finite and nonnegative, got {}",
                    term.delay
                )));
            }
            let rf = term.rf.normalize()?;
            match grouped
                .iter_mut()
                .find(|g| (g.delay - term.delay).abs() <= DELAY_MERGE_TOL * (1.0 + term.delay))
            {
                Some(g) => g.rf = &g.rf + &rf,
                None => grouped.push(LaplaceTerm { delay: term.delay, rf }),
            }
        }
        grouped.retain(|t| !t.rf.is_zero());
        grouped.sort_by(|a, b| a.delay.total_cmp(&b.delay));
        let abscissa = grouped
            .iter()
            .map(|t| t.rf.abscissa())
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            terms: grouped,
            abscissa,
        })
    }

    pub fn zero() -> Self {
        Self {
            terms: Vec::new(),
            abscissa: f64::NEG_INFINITY,
        }
    }

    /// Undelayed single rational function.
    pub fn rational(rf: RationalFunction) -> Self {
        Self::new(vec![LaplaceTerm { delay: 0.0, rf }]).expect("zero delay is valid")
    }

    pub fn terms(&self) -> &[LaplaceTerm] {
        &self.terms
    }

    pub fn abscissa(&self) -> f64 {
        self.abscissa
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn map_terms(&self, f: impl Fn(&LaplaceTerm) -> LaplaceTerm) -> Self {
        Self::new(self.terms.iter().map(f).collect()).expect("delays stay valid")
    }

    pub fn scale(&self, k: Complex64) -> Self {
        self.map_terms(|t| LaplaceTerm {
            delay: t.delay,
            rf: t.rf.scale(k),
        })
    }

    /// Multiplies every term by `h(s)`.
    pub fn mul_rational(&self, h: &RationalFunction) -> Self {
        self.map_terms(|t| LaplaceTerm {
            delay: t.delay,
            rf: &t.rf * h,
        })
    }

    /// Multiplies by `e^(−delay·s)`.
    pub fn delay(&self, delay: f64) -> Result<Self> {
        Self::new(
            self.terms
                .iter()
                .map(|t| LaplaceTerm {
                    delay: t.delay + delay,
                    rf: t.rf.clone(),
                })
                .collect(),
        )
    }

    /// Poles of all terms, for distance checks.
    fn poles(&self) -> Vec<Complex64> {
        self.terms
            .iter()
            .flat_map(|t| t.rf.poles().iter().map(|r| r.value).collect::<Vec<_>>())
            .collect()
    }
}

impl Add for &LaplaceExpr {
    type Output = LaplaceExpr;
    fn add(self, rhs: &LaplaceExpr) -> LaplaceExpr {
        LaplaceExpr::new(self.terms.iter().chain(&rhs.terms).cloned().collect())
            .expect("delays stay valid")
    }
}

impl Sub for &LaplaceExpr {
    type Output = LaplaceExpr;
    fn sub(self, rhs: &LaplaceExpr) -> LaplaceExpr {
        self + &rhs.scale(c(-1.0))
    }
}

impl Neg for &LaplaceExpr {
    type Output = LaplaceExpr;
    fn neg(self) -> LaplaceExpr {
        self.scale(c(-1.0))
    }
}

/// Transform of the modes sharing one onset, kept as its pole expansion over
/// the common denominator `Π (s − λ)^(max n + 1)`.
fn transform_group(modes: &[&Mode]) -> RationalFunction {
    let terms = modes
        .iter()
        .map(|m| PoleTerm {
            pole: m.exponent,
            order: m.power as usize + 1,
            coefficient: m.amplitude * factorial(m.power as usize),
        })
        .collect();
    RationalFunction::from_expansion(PartialFractions { polynomial_part: Polynomial::zero(), terms })
}

/// Laplace transform, mode by mode: `(t−a)ⁿe^(λ(t−a))u(t−a) ↔ e^(−as)·n!/(s−λ)^(n+1)`.
pub fn transform(f: &TimeExpr) -> LaplaceExpr {
    let mut terms = Vec::new();
    for onset in f.onsets() {
        let group: Vec<&Mode> = f.modes().iter().filter(|m| m.shift == onset).collect();
        let rf = transform_group(&group);
        terms.push(LaplaceTerm { delay: onset, rf });
    }
    LaplaceExpr::new(terms).expect("onsets are nonnegative")
}

/// Inverse transform through partial fractions:
/// `c/(s−p)ᵏ ↔ c·t^(k−1)e^(pt)/(k−1)!`.
pub fn inverse(expr: &LaplaceExpr) -> Result<TimeExpr> {
    let mut modes = Vec::new();
    for term in expr.terms() {
        if !term.rf.is_proper() {
            return Err(Error::Improper);
        }
        let pf = term.rf.partial_fractions()?;
        for pt in pf.terms {
            let k = pt.order - 1;
            modes.push(Mode::new(
                pt.coefficient / factorial(k),
                k as u32,
                pt.pole,
                term.delay,
            ));
        }
    }
    TimeExpr::new(modes)
}

/// `F(s − b)`, the transform of `e^(bt)·f(t)`. A delayed term picks up the
/// constant `e^(a·b)`.
pub fn freq_shift(expr: &LaplaceExpr, b: Complex64) -> LaplaceExpr {
    if b == c(0.0) {
        return expr.clone();
    }
    expr.map_terms(|t| LaplaceTerm {
        delay: t.delay,
        rf: t.rf.compose_shift(b).scale((b * t.delay).exp()),
    })
}

/// `(1/k)·F(s/k)`, the transform of `f(k·t)`. Delays become `a/k`.
pub fn time_scale(expr: &LaplaceExpr, k: f64) -> Result<LaplaceExpr> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("time scale must be positive, got {k}")));
    }
    if k == 1.0 {
        return Ok(expr.clone());
    }
    Ok(expr.map_terms(|t| LaplaceTerm {
        delay: t.delay / k,
        rf: t.rf.scale_arg(c(1.0 / k)).scale(c(1.0 / k)),
    }))
}

/// Transform of `cos(ω₀t)·f(t)` or `sin(ω₀t)·f(t)`.
pub fn modulate(f: &TimeExpr, omega: f64, kind: Modulation) -> LaplaceExpr {
    let base = transform(f);
    let up = freq_shift(&base, Complex64::new(0.0, omega));
    let down = freq_shift(&base, Complex64::new(0.0, -omega));
    match kind {
        Modulation::Cosine => (&up + &down).scale(c(0.5)),
        Modulation::Sine => (&up - &down).scale(Complex64::new(0.0, -0.5)),
    }
}

/// `sⁿF(s) − Σₖ s^(n−1−k) f⁽ᵏ⁾(0⁺)`, the transform of the n-th derivative.
pub fn nth_derivative_transform(f: &TimeExpr, n: usize) -> Result<LaplaceExpr> {
    if f.has_shifts() {
        return Err(Error::GatedDerivative);
    }
    let base = transform(f);
    if n == 0 || base.is_zero() {
        return Ok(base);
    }
    let mut initial = Vec::with_capacity(n);
    let mut g = f.clone();
    for _ in 0..n {
        initial.push(g.eval(0.0)?);
        g = g.derivative()?;
    }
    // P(s) = Σₖ f⁽ᵏ⁾(0)·s^(n−1−k)
    let mut p = vec![c(0.0); n];
    for (k, v) in initial.into_iter().enumerate() {
        p[n - 1 - k] = v;
    }
    let p = Polynomial::new(p);
    let rf = &base.terms()[0].rf;
    let den = rf.den();
    let num = &rf.num().shift_up(n) - &(&p * den);
    // the derivative is again an exponential polynomial, so the result is proper
    let num = num.truncate((den.degree() - 1).max(0) as usize);
    Ok(LaplaceExpr::rational(rf.with_numerator(num)?))
}

/// `Σ e^(−delay·s)·rf(s)` inside the region of convergence.
pub fn laplace_eval(expr: &LaplaceExpr, s: Complex64) -> Result<Complex64> {
    if !(s.re > expr.abscissa) {
        return Err(Error::OutsideRegion {
            re: s.re,
            abscissa: expr.abscissa,
        });
    }
    if expr
        .poles()
        .iter()
        .any(|p| (s - p).norm() <= POLE_GUARD * (1.0 + p.norm()))
    {
        return Err(Error::AtPole(s));
    }
    Ok(expr
        .terms
        .iter()
        .map(|t| (-t.delay * s).exp() * t.rf.eval(s))
        .sum())
}
