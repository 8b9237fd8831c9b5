//! n-order linear systems `Σαₖ y⁽ᵏ⁾ = Σβₖ x⁽ᵏ⁾` and their transfer functions
//! `H(s) = Σβₖsᵏ / Σαₖsᵏ` under zero initial conditions.

use num_complex::Complex64;

use crate::algebra::{c, Polynomial, RationalFunction};
use crate::error::{Error, Result};
use crate::laplace::{inverse, laplace_eval, transform, LaplaceExpr};
use crate::timefun::TimeExpr;

const REAL_TOL: f64 = 1e-9;

/// Coefficient lists of a linear ODE, lowest derivative first.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl SystemSpec {
    /// `alpha` multiplies the output derivatives, `beta` the input derivatives.
    pub fn new(alpha: Vec<f64>, mut beta: Vec<f64>) -> Result<Self> {
        if alpha.iter().chain(&beta).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        if alpha.last().is_none_or(|&a| a == 0.0) {
            return Err(Error::OrderViolation);
        }
        while beta.len() > 1 && beta.last() == Some(&0.0) {
            beta.pop();
        }
        if beta.len() > alpha.len() {
            return Err(Error::InvalidArgument(format!(
                "input order {} exceeds output order {}",
                beta.len() - 1,
                alpha.len() - 1
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn order(&self) -> usize {
        self.alpha.len() - 1
    }

    /// Rescales time to units of `tau`: `d/dt = (1/τ)·d/dt'`, so the k-th
    /// coefficients pick up `τ^(−k)`.
    pub fn rescale_time(&self, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument(format!("time scale must be positive, got {tau}")));
        }
        let scale = |xs: &[f64]| -> Vec<f64> {
            xs.iter()
                .enumerate()
                .map(|(k, x)| x / tau.powi(k as i32))
                .collect()
        };
        Self::new(scale(&self.alpha), scale(&self.beta))
    }
}

/// Canonical rational transfer function with its abscissa of convergence.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    pub rf: RationalFunction,
    pub abscissa: f64,
}

impl TransferFunction {
    pub fn new(rf: RationalFunction) -> Result<Self> {
        let rf = rf.normalize()?;
        let abscissa = rf.abscissa();
        Ok(Self { rf, abscissa })
    }

    pub fn identity() -> Self {
        Self {
            rf: RationalFunction::constant(c(1.0)),
            abscissa: f64::NEG_INFINITY,
        }
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.rf.eval(s)
    }
}

/// `(Σβₖsᵏ)/(Σαₖsᵏ)`, normalized.
pub fn ode_to_tf(sys: &SystemSpec) -> Result<TransferFunction> {
    TransferFunction::new(RationalFunction::new(
        Polynomial::from_real(&sys.beta),
        Polynomial::from_real(&sys.alpha),
    )?)
}

/// Reads the coefficient lists back off a real transfer function, scaled so
/// that `α₀ = 1`, or `αₙ = 1` when the denominator has a root at the origin.
pub fn tf_to_ode(tf: &TransferFunction) -> Result<SystemSpec> {
    if !tf.rf.is_real(REAL_TOL) {
        return Err(Error::NonReal);
    }
    let num = tf.rf.num();
    let den = tf.rf.den();
    let rho = tf.rf.poles().max_modulus().max(f64::MIN_POSITIVE);
    let den0 = den.coeff(0);
    let constant_vanishes = den.degree() >= 1 && den0.norm() <= 1e-13 * den.taylor_scale(0, rho);
    let scale = if constant_vanishes || den0.norm() == 0.0 {
        den.lead()
    } else {
        den0
    };
    let real = |p: &Polynomial, len: usize| -> Vec<f64> {
        (0..len).map(|k| (p.coeff(k) / scale).re).collect()
    };
    let mut alpha = real(den, den.coeffs().len());
    if constant_vanishes {
        alpha[0] = 0.0;
    }
    let beta = if num.is_zero() {
        vec![0.0]
    } else {
        real(num, num.coeffs().len())
    };
    SystemSpec::new(alpha, beta)
}

/// Series connection `h2·h1`.
pub fn cascade(h1: &TransferFunction, h2: &TransferFunction) -> Result<TransferFunction> {
    TransferFunction::new(&h1.rf * &h2.rf)
}

/// Zero-state response `y = L⁻¹[H(s)·X(s)]`.
pub fn forced_response(sys: &SystemSpec, x: &TimeExpr) -> Result<TimeExpr> {
    let h = ode_to_tf(sys)?;
    response_through(&h, x)
}

/// Zero-state response of a transfer function.
pub fn response_through(h: &TransferFunction, x: &TimeExpr) -> Result<TimeExpr> {
    let y: LaplaceExpr = transform(x).mul_rational(&h.rf);
    inverse(&y)
}

/// `H(s)·X(s)` at a point, for frequency-response checks.
pub fn response_transform_at(h: &TransferFunction, x: &TimeExpr, s: Complex64) -> Result<Complex64> {
    Ok(h.eval(s) * laplace_eval(&transform(x), s)?)
}

/// Largest scaled residual of `Σαₖy⁽ᵏ⁾ − Σβₖx⁽ᵏ⁾` over `times`, using
/// symbolic derivatives. The scale is `1 + max` magnitude of the individual
/// terms, so the result is comparable against an absolute tolerance.
pub fn ode_residual(sys: &SystemSpec, x: &TimeExpr, y: &TimeExpr, times: &[f64]) -> Result<f64> {
    let derivatives = |f: &TimeExpr, n: usize| {
        let mut out = vec![f.clone()];
        for k in 1..=n {
            let next = out[k - 1].smooth_derivative();
            out.push(next);
        }
        out
    };
    let ys = derivatives(y, sys.order());
    let xs = derivatives(x, sys.beta.len() - 1);
    let mut worst: f64 = 0.0;
    for &t in times {
        let mut residual = c(0.0);
        let mut magnitude: f64 = 0.0;
        for (a, dy) in sys.alpha.iter().zip(&ys) {
            let v = dy.eval(t)? * *a;
            residual += v;
            magnitude = magnitude.max(v.norm());
        }
        for (b, dx) in sys.beta.iter().zip(&xs) {
            let v = dx.eval(t)? * *b;
            residual -= v;
            magnitude = magnitude.max(v.norm());
        }
        worst = worst.max(residual.norm() / (1.0 + magnitude));
    }
    Ok(worst)
}
