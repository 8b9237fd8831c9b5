use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::dd::Cdd;
use super::{binomial, c};
use crate::algebra::roots::{self, RootSet};
use crate::error::{Error, Result};

/// Dense polynomial in `s` with complex coefficients stored lowest power first.
///
/// The zero polynomial is the empty coefficient vector. Every constructor
/// strips trailing zero coefficients, so a nonzero polynomial always has a
/// nonzero leading coefficient.
#[derive(Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| c(x)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(c(1.0))
    }

    pub fn constant(value: Complex64) -> Self {
        Self::new(vec![value])
    }

    /// `value·s^power`
    pub fn monomial(value: Complex64, power: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); power + 1];
        coeffs[power] = value;
        Self::new(coeffs)
    }

    /// The linear factor `s − root`.
    pub fn linear(root: Complex64) -> Self {
        Self::new(vec![-root, c(1.0)])
    }

    /// `lead·Π (s − rᵢ)^mᵢ`
    pub fn from_roots(lead: Complex64, roots: &RootSet) -> Self {
        let mut p = Self::constant(lead);
        for root in roots.iter() {
            for _ in 0..root.multiplicity {
                p = &p * &Self::linear(root.value);
            }
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Degree, with −1 for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `s^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn lead(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.max_abs_coeff();
        self.coeffs.iter().all(|c| c.im.abs() <= tol * scale.max(f64::MIN_POSITIVE))
    }

    /// Drops the imaginary parts of all coefficients.
    pub fn real_part(&self) -> Self {
        Self::new(self.coeffs.iter().map(|z| c(z.re)).collect())
    }

    /// Horner evaluation.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * s + a)
    }

    /// Value and first derivative in one Horner sweep.
    pub fn eval_with_derivative(&self, s: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut value = zero;
        let mut deriv = zero;
        for &a in self.coeffs.iter().rev() {
            deriv = deriv * s + value;
            value = value * s + a;
        }
        (value, deriv)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * k).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &a)| a * k as f64)
                .collect(),
        )
    }

    /// Coefficients of `q(h) = p(center + h)`, i.e. the Taylor coefficients
    /// `p⁽ʲ⁾(center)/j!`. Accumulated in double-double, since the low
    /// coefficients cancel heavily near clustered roots.
    pub fn taylor_shift(&self, center: Complex64) -> Self {
        let mut a: Vec<Cdd> = self.coeffs.iter().map(|&z| Cdd::from(z)).collect();
        let x = Cdd::from(center);
        let n = a.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                a[j] = a[j].add(x.mul(a[j + 1]));
            }
        }
        Self::new(a.into_iter().map(Cdd::to_c64).collect())
    }

    /// `p(s − shift)`, the substitution behind frequency shifting.
    pub fn compose_shift(&self, shift: Complex64) -> Self {
        self.taylor_shift(-shift)
    }

    /// `p(k·s)`
    pub fn scale_arg(&self, k: Complex64) -> Self {
        let mut power = c(1.0);
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for &a in &self.coeffs {
            coeffs.push(a * power);
            power *= k;
        }
        Self::new(coeffs)
    }

    /// Multiplication by `s^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k];
        coeffs.extend_from_slice(&self.coeffs);
        Self::new(coeffs)
    }

    /// Keeps only the coefficients of `s^0 .. s^max_degree`.
    pub fn truncate(&self, max_degree: usize) -> Self {
        Self::new(self.coeffs.iter().take(max_degree + 1).copied().collect())
    }

    /// Polynomial long division `self = q·divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        if divisor.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let dd = divisor.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let lead = divisor.lead();
        let mut quot = vec![Complex64::new(0.0, 0.0); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * d;
            }
            rem[k + dd] = Complex64::new(0.0, 0.0);
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Divides out `s − root` by synthetic division from the top coefficient,
    /// discarding the remainder.
    pub fn deflate(&self, root: Complex64) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n - 1];
        let mut carry = Complex64::new(0.0, 0.0);
        for k in (1..n).rev() {
            carry = self.coeffs[k] + carry * root;
            out[k - 1] = carry;
        }
        Self::new(out)
    }

    /// Divides out `s − root` starting from the constant coefficient. Stable
    /// for roots that are large relative to the others, and maps equal
    /// constant coefficients to equal constant coefficients.
    pub fn deflate_backward(&self, root: Complex64) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self::zero();
        }
        if root == Complex64::new(0.0, 0.0) {
            return Self::new(self.coeffs[1..].to_vec());
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n - 1];
        let mut prev = Complex64::new(0.0, 0.0);
        for k in 0..n - 1 {
            // a_k = q_{k−1} − r·q_k
            let q = (prev - self.coeffs[k]) / root;
            out[k] = q;
            prev = q;
        }
        Self::new(out)
    }

    /// Composite deflation: backward division for the low coefficients and
    /// forward division for the high ones, split where the residual is
    /// smallest. Stable for roots of any size relative to the others.
    pub fn deflate_composite(&self, root: Complex64) -> Self {
        let fwd = self.deflate(root).into_coeffs();
        let bwd = self.deflate_backward(root).into_coeffs();
        let n = self.coeffs.len().saturating_sub(1);
        if fwd.len() < n || bwd.len() < n {
            // a trimmed quotient means an exact zero lead; fall back
            return if self.deflation_error(root, &Self::new(bwd.clone()))
                <= self.deflation_error(root, &Self::new(fwd.clone()))
            {
                Self::new(bwd)
            } else {
                Self::new(fwd)
            };
        }
        (0..=n)
            .map(|j| Self::new(bwd[..j].iter().chain(&fwd[j..]).copied().collect()))
            .map(|q| (self.deflation_error(root, &q), q))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, q)| q)
            .unwrap_or_else(Self::zero)
    }

    /// `‖(s − root)·q − self‖∞ / ‖self‖∞`
    pub(crate) fn deflation_error(&self, root: Complex64, quotient: &Self) -> f64 {
        let back = quotient * &Self::linear(root);
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let len = back.coeffs.len().max(self.coeffs.len());
        (0..len)
            .map(|k| (back.coeff(k) - self.coeff(k)).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Sum of `|aᵢ|·C(i, j)·r^(i−j)`, the magnitude scale of the j-th Taylor
    /// coefficient at a point of modulus `r`.
    pub(crate) fn taylor_scale(&self, j: usize, r: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(j)
            .map(|(i, a)| a.norm() * binomial(i, j) * r.powi((i - j) as i32))
            .sum()
    }

    /// All roots with multiplicities.
    pub fn roots(&self) -> Result<RootSet> {
        roots::find_roots(self)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial{:?}", self.coeffs)
    }
}

/// Coefficientwise sum. A coefficient whose sum is below a few ulps of the
/// operands' magnitudes is treated as exact cancellation and becomes zero.
fn add_coeffs(a: &[Complex64], b: &[Complex64], sign: f64) -> Polynomial {
    let n = a.len().max(b.len());
    let zero = Complex64::new(0.0, 0.0);
    let coeffs = (0..n)
        .map(|k| {
            let x = a.get(k).copied().unwrap_or(zero);
            let y = b.get(k).copied().unwrap_or(zero) * sign;
            let sum = x + y;
            if sum.norm() <= 8.0 * f64::EPSILON * (x.norm() + y.norm()) {
                zero
            } else {
                sum
            }
        })
        .collect();
    Polynomial::new(coeffs)
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        add_coeffs(&self.coeffs, &rhs.coeffs, 1.0)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        add_coeffs(&self.coeffs, &rhs.coeffs, -1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(c(-1.0))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn p(xs: &[f64]) -> Polynomial {
        Polynomial::from_real(xs)
    }

    #[test]
    fn add_examples() {
        assert_eq!(&p(&[1.0, 2.0]) + &p(&[3.0]), p(&[4.0, 2.0]));
        assert_eq!(&p(&[1.0, 2.0]) + &Polynomial::zero(), p(&[1.0, 2.0]));
        let z = &p(&[1.0, 1.0]) + &p(&[-1.0, -1.0]);
        assert!(z.is_zero());
        assert_eq!(z.degree(), -1);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(&p(&[1.0, 1.0]) * &p(&[1.0, -1.0]), p(&[1.0, 0.0, -1.0]));
        assert_eq!(&p(&[3.0, 1.0, 4.0]) * &Polynomial::one(), p(&[3.0, 1.0, 4.0]));
        assert_eq!(&p(&[2.0, 1.0]) * &p(&[3.0, 1.0]), p(&[6.0, 5.0, 1.0]));
        assert_eq!((&p(&[2.0, 1.0]) * &p(&[3.0, 1.0])).degree(), 2);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p(&[6.0, 5.0, 1.0]).eval(c(-2.0)), c(0.0));
        assert_eq!(Polynomial::zero().eval(Complex64::new(3.0, -1.0)), c(0.0));
        assert_eq!(p(&[1.0, 1.0]).eval(Complex64::i()), Complex64::new(1.0, 1.0));
    }

    #[test]
    fn zero_is_canonical() {
        assert_eq!(Polynomial::new(vec![c(0.0), c(0.0)]), Polynomial::zero());
        assert!(Polynomial::new(vec![c(0.0)]).coeffs().is_empty());
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = p(&[1.0, 0.0, 1.0]);
        let b = p(&[1.0, 1.0]);
        let (q, r) = a.div_rem(&b).unwrap();
        assert_eq!(q, p(&[-1.0, 1.0]));
        assert_eq!(r, p(&[2.0]));
        assert_eq!(a.div_rem(&Polynomial::zero()), Err(Error::ZeroDenominator));
    }

    #[test]
    fn taylor_shift_matches_substitution() {
        let a = p(&[1.0, -2.0, 0.5, 3.0]);
        let center = Complex64::new(0.3, -1.1);
        let q = a.taylor_shift(center);
        for h in [c(0.0), c(0.7), Complex64::new(-0.2, 0.4)] {
            assert!((q.eval(h) - a.eval(center + h)).norm() < 1e-12);
        }
        let (v, d) = a.eval_with_derivative(center);
        assert!((q.coeff(0) - v).norm() < 1e-12);
        assert!((q.coeff(1) - d).norm() < 1e-12);
    }

    #[test]
    fn deflate_exact_factor() {
        let a = p(&[6.0, 5.0, 1.0]);
        assert_eq!(a.deflate(c(-2.0)), p(&[3.0, 1.0]));
    }

    #[test]
    fn scale_arg_and_shift() {
        let a = p(&[1.0, 1.0]);
        assert_eq!(a.scale_arg(c(0.5)), p(&[1.0, 0.5]));
        assert_eq!(a.compose_shift(c(-3.0)), p(&[4.0, 1.0]));
    }
}
