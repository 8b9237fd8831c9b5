use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::roots::same_root;
use super::{c, Polynomial, Root, RootSet};
use crate::error::{Error, Result};

/// Relative tolerance for the partial-fraction resummation check.
const RESUM_TOL: f64 = 1e-8;
/// Laurent coefficients this small relative to the largest one count as zero.
const CANCEL_TOL: f64 = 1e-10;

/// `num(s)/den(s)` kept in canonical form: monic denominator and no root
/// shared between numerator and denominator.
///
/// When the denominator was built from known poles, the factorization is
/// carried along so that partial fractions never have to recover clustered
/// poles from expanded coefficients. Functions built from pole terms also
/// keep their partial-fraction expansion, which linear operations update
/// exactly; `num` and `den` are then derived from it.
#[derive(Debug, Clone)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
    poles: Option<Vec<Root>>,
    expansion: Option<PartialFractions>,
}

impl PartialEq for RationalFunction {
    fn eq(&self, other: &Self) -> bool {
        self.num == other.num && self.den == other.den
    }
}

/// One `coefficient/(s − pole)^order` term of a partial-fraction expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleTerm {
    pub pole: Complex64,
    pub order: usize,
    pub coefficient: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialFractions {
    pub polynomial_part: Polynomial,
    pub terms: Vec<PoleTerm>,
}

impl PartialFractions {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.polynomial_part.eval(s)
            + self
                .terms
                .iter()
                .map(|t| t.coefficient / (s - t.pole).powu(t.order as u32))
                .sum::<Complex64>()
    }
}

impl RationalFunction {
    /// Builds and normalizes `num/den`.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        Self::raw(num, den)?.normalize()
    }

    /// `num/(lead·Π (s − pᵢ)^mᵢ)` for a numerator known to vanish at none of
    /// the poles. No cancellation is attempted: near-coincident poles would
    /// otherwise be merged with nearby numerator zeros.
    pub fn from_poles(num: Polynomial, lead: Complex64, poles: &RootSet) -> Result<Self> {
        if lead == c(0.0) {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        Ok(Self {
            num,
            den: Polynomial::from_roots(lead, poles),
            poles: Some(poles.iter().copied().collect()),
            expansion: None,
        }
        .monic())
    }

    /// `polynomial_part + Σ coefficient/(s − pole)^order`, in canonical form.
    /// Poles within clustering tolerance are merged and coefficients that
    /// vanish relative to the largest one are dropped.
    pub fn from_expansion(pf: PartialFractions) -> Self {
        let mut centers: Vec<Complex64> = Vec::new();
        let mut terms: Vec<PoleTerm> = Vec::new();
        for t in pf.terms {
            let pole = match centers.iter().find(|p| same_root(**p, t.pole)) {
                Some(&p) => p,
                None => {
                    centers.push(t.pole);
                    t.pole
                }
            };
            match terms.iter_mut().find(|x| x.pole == pole && x.order == t.order) {
                Some(x) => x.coefficient += t.coefficient,
                None if t.order > 0 => terms.push(PoleTerm { pole, ..t }),
                None => {}
            }
        }
        let scale = terms.iter().map(|t| t.coefficient.norm()).fold(0.0, f64::max);
        terms.retain(|t| t.coefficient.norm() > CANCEL_TOL * scale);
        let poles: Vec<Root> = centers
            .iter()
            .filter_map(|&value| {
                let order = terms.iter().filter(|t| t.pole == value).map(|t| t.order).max()?;
                Some(Root { value, multiplicity: order })
            })
            .collect();
        let den = Polynomial::from_roots(c(1.0), &RootSet::new(poles.clone()));
        let mut num = &pf.polynomial_part * &den;
        for t in &terms {
            let rest: Vec<Root> = poles
                .iter()
                .map(|r| Root {
                    value: r.value,
                    multiplicity: if r.value == t.pole { r.multiplicity - t.order } else { r.multiplicity },
                })
                .collect();
            num = &num + &Polynomial::from_roots(t.coefficient, &RootSet::new(rest));
        }
        if num.is_zero() {
            return Self::zero();
        }
        Self {
            num,
            den,
            poles: Some(poles),
            expansion: Some(PartialFractions { polynomial_part: pf.polynomial_part, terms }),
        }
    }

    fn map_expansion(&self, f: impl Fn(&PartialFractions) -> PartialFractions) -> Option<Self> {
        self.expansion.as_ref().map(|pf| Self::from_expansion(f(pf)))
    }

    /// `num/den` over this function's denominator, normalized.
    pub fn with_numerator(&self, num: Polynomial) -> Result<Self> {
        Self { num, den: self.den.clone(), poles: self.poles.clone(), expansion: None }.normalize()
    }

    /// Wraps `num/den` without normalizing.
    pub fn raw(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self { num, den, poles: None, expansion: None })
    }

    pub fn zero() -> Self {
        Self::polynomial(Polynomial::zero())
    }

    pub fn constant(value: Complex64) -> Self {
        Self::polynomial(Polynomial::constant(value))
    }

    pub fn polynomial(p: Polynomial) -> Self {
        Self {
            num: p.clone(),
            den: Polynomial::one(),
            poles: Some(Vec::new()),
            expansion: Some(PartialFractions { polynomial_part: p, terms: Vec::new() }),
        }
    }

    /// `value/(s − pole)^order`
    pub fn pole_term(value: Complex64, pole: Complex64, order: usize) -> Self {
        if order == 0 {
            return Self::constant(value);
        }
        Self::from_expansion(PartialFractions {
            polynomial_part: Polynomial::zero(),
            terms: vec![PoleTerm { pole, order, coefficient: value }],
        })
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `deg num < deg den`
    pub fn is_proper(&self) -> bool {
        self.num.degree() < self.den.degree()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.num.is_real(tol) && self.den.is_real(tol)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval(s) / self.den.eval(s)
    }

    pub fn poles(&self) -> RootSet {
        self.find_poles().unwrap_or_default()
    }

    /// Known factorization when it still matches the degree, else a root search.
    fn find_poles(&self) -> Result<RootSet> {
        if self.den.degree() < 1 {
            return Ok(RootSet::default());
        }
        match &self.poles {
            Some(p) if multiplicity(p) == self.den.degree() as usize => Ok(RootSet::new(p.clone())),
            _ => self.den.roots(),
        }
    }

    fn known_poles(&self) -> Option<&Vec<Root>> {
        self.poles
            .as_ref()
            .filter(|p| multiplicity(p) == self.den.degree().max(0) as usize)
    }

    /// Largest real part among the poles, `−∞` without poles.
    pub fn abscissa(&self) -> f64 {
        self.poles().max_real()
    }

    /// Monic denominator, common roots cancelled by multiplicity.
    pub fn normalize(&self) -> Result<Self> {
        if self.den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if self.num.is_zero() {
            return Ok(Self::zero());
        }
        if self.expansion.is_some() {
            return Ok(self.clone());
        }
        let real_input = self.num.coeffs().iter().all(|z| z.im == 0.0)
            && self.den.coeffs().iter().all(|z| z.im == 0.0);

        let mut num = self.num.clone();
        let mut den = self.den.clone();
        let mut poles = self.known_poles().cloned();
        let mut cancelled = false;
        if let Some(known) = poles.as_mut().filter(|p| !p.is_empty()) {
            cancelled = cancel_known(&mut num, den.lead(), known)?;
            if cancelled {
                den = Polynomial::from_roots(den.lead(), &RootSet::new(known.clone()));
            }
        } else if num.degree() >= 1 && den.degree() >= 1 {
            let num_roots = num.roots()?;
            let den_roots = den.roots()?;
            for dr in den_roots.iter() {
                for nr in num_roots.iter() {
                    if same_root(dr.value, nr.value) {
                        let common = dr.multiplicity.min(nr.multiplicity);
                        let mean = (dr.value * dr.multiplicity as f64
                            + nr.value * nr.multiplicity as f64)
                            / (dr.multiplicity + nr.multiplicity) as f64;
                        for _ in 0..common {
                            (num, den) = [dr.value, nr.value, mean]
                                .into_iter()
                                .map(|at| deflate_pair(&num, &den, at))
                                .min_by(|a, b| a.2.total_cmp(&b.2))
                                .map(|(n, d, _)| (n, d))
                                .expect("three candidates");
                        }
                        cancelled |= common > 0;
                    }
                }
            }
        }
        // Cancelling roots away from 0 leaves r(0) unchanged; carry it over
        // exactly so DC gains survive normalization.
        let (n0, d0) = (self.num.coeff(0), self.den.coeff(0));
        if cancelled && d0 != c(0.0) && den.coeff(0) != c(0.0) {
            let mut coeffs = num.into_coeffs();
            if coeffs.is_empty() {
                coeffs.push(c(0.0));
            }
            coeffs[0] = den.coeff(0) * (n0 / d0);
            num = Polynomial::new(coeffs);
        }
        if real_input {
            num = num.real_part();
            den = den.real_part();
        }
        let (num, den) = monic_pair(&num, &den);
        Ok(Self { num, den, poles, expansion: None })
    }

    pub fn scale(&self, k: Complex64) -> Self {
        if k == c(0.0) {
            return Self::zero();
        }
        if let Some(r) = self.map_expansion(|pf| PartialFractions {
            polynomial_part: pf.polynomial_part.scale(k),
            terms: pf.terms.iter().map(|t| PoleTerm { coefficient: t.coefficient * k, ..*t }).collect(),
        }) {
            return r;
        }
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
            poles: self.poles.clone(),
            expansion: None,
        }
    }

    /// `r(s − shift)`
    pub fn compose_shift(&self, shift: Complex64) -> Self {
        if let Some(r) = self.map_expansion(|pf| PartialFractions {
            polynomial_part: pf.polynomial_part.compose_shift(shift),
            terms: pf.terms.iter().map(|t| PoleTerm { pole: t.pole + shift, ..*t }).collect(),
        }) {
            return r;
        }
        Self {
            num: self.num.compose_shift(shift),
            den: self.den.compose_shift(shift),
            poles: self.map_poles(|p| p + shift),
            expansion: None,
        }
        .monic()
    }

    /// `r(k·s)`
    pub fn scale_arg(&self, k: Complex64) -> Self {
        // c/(k·s − p)ⁿ = c·k⁻ⁿ/(s − p/k)ⁿ
        if let Some(r) = self.map_expansion(|pf| PartialFractions {
            polynomial_part: pf.polynomial_part.scale_arg(k),
            terms: pf
                .terms
                .iter()
                .map(|t| PoleTerm {
                    pole: t.pole / k,
                    order: t.order,
                    coefficient: t.coefficient / k.powu(t.order as u32),
                })
                .collect(),
        }) {
            return r;
        }
        Self {
            num: self.num.scale_arg(k),
            den: self.den.scale_arg(k),
            poles: self.map_poles(|p| p / k),
            expansion: None,
        }
        .monic()
    }

    fn map_poles(&self, f: impl Fn(Complex64) -> Complex64) -> Option<Vec<Root>> {
        self.known_poles().map(|p| {
            p.iter()
                .map(|r| Root { value: f(r.value), multiplicity: r.multiplicity })
                .collect()
        })
    }

    fn monic(self) -> Self {
        let (num, den) = monic_pair(&self.num, &self.den);
        Self { num, den, poles: self.poles, expansion: self.expansion }
    }

    /// Returns `polynomial_part + Σ coefficient/(s − pole)^order`.
    pub fn partial_fractions(&self) -> Result<PartialFractions> {
        if let Some(pf) = &self.expansion {
            self.check_resummation(pf)?;
            return Ok(pf.clone());
        }
        let (quot, rem) = self.num.div_rem(&self.den)?;
        let mut terms = Vec::new();
        if !rem.is_zero() && self.den.degree() >= 1 {
            let poles = self.find_poles()?;
            for pole in poles.iter() {
                let m = pole.multiplicity;
                let series = principal_part(&rem, self.den.lead(), pole, &poles);
                for order in 1..=m {
                    let coefficient = series[m - order];
                    terms.push(PoleTerm {
                        pole: pole.value,
                        order,
                        coefficient,
                    });
                }
            }
        }
        let pf = PartialFractions {
            polynomial_part: quot,
            terms,
        };
        self.check_resummation(&pf)?;
        Ok(pf)
    }

    fn check_resummation(&self, pf: &PartialFractions) -> Result<()> {
        let deg = self.den.degree().max(0) as usize;
        let count = 2 * deg + 1;
        let rho = pf
            .terms
            .iter()
            .map(|t| t.pole.norm())
            .fold(0.0, f64::max);
        let radius = if rho > 0.0 { 1.5 * rho } else { 1.0 };
        let mut worst: f64 = 0.0;
        for j in 0..count {
            let angle = 2.0 * PI * j as f64 / count as f64 + 0.3;
            let s = Complex64::from_polar(radius, angle);
            let direct = self.eval(s);
            let resummed = pf.eval(s);
            let magnitude = pf.polynomial_part.eval(s).norm()
                + pf
                    .terms
                    .iter()
                    .map(|t| (t.coefficient / (s - t.pole).powu(t.order as u32)).norm())
                    .sum::<f64>();
            let scale = direct.norm().max(magnitude);
            if scale > 0.0 {
                worst = worst.max((direct - resummed).norm() / scale);
            }
        }
        if !(worst <= RESUM_TOL) {
            return Err(Error::PartialFractions(worst));
        }
        Ok(())
    }
}

/// Laurent coefficients of `num/(lead·Π (s − q)^m_q)` at `pole`, highest order
/// first: entry `j` multiplies `(s − pole)^(j − m)`.
fn principal_part(num: &Polynomial, lead: Complex64, pole: &Root, poles: &RootSet) -> Vec<Complex64> {
    let m = pole.multiplicity;
    let numer = num.taylor_shift(pole.value).truncate(m - 1);
    // lead·Π_{q≠p} (p − q + h)^{m_q}, truncated to order m − 1
    let mut denom = Polynomial::constant(lead);
    for other in poles.iter().filter(|o| o.value != pole.value) {
        let factor = Polynomial::new(vec![pole.value - other.value, c(1.0)]);
        for _ in 0..other.multiplicity {
            denom = (&denom * &factor).truncate(m - 1);
        }
    }
    series_divide(&numer, &denom, m)
}

/// Cancellation against exactly known poles: a pole loses one order for each
/// leading Laurent coefficient that vanishes relative to the largest one.
/// Deflates `num` and updates `poles` in place; true if anything cancelled.
fn cancel_known(num: &mut Polynomial, lead: Complex64, poles: &mut Vec<Root>) -> Result<bool> {
    let set = RootSet::new(poles.clone());
    let den = Polynomial::from_roots(lead, &set);
    let (_, rem) = num.div_rem(&den)?;
    let parts: Vec<Vec<Complex64>> = set.iter().map(|p| principal_part(&rem, lead, p, &set)).collect();
    let scale = parts.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let mut cancelled = false;
    for (pole, part) in poles.iter_mut().zip(&parts) {
        let k = part.iter().take_while(|z| z.norm() <= CANCEL_TOL * scale).count();
        for _ in 0..k {
            *num = num.deflate_composite(pole.value);
        }
        pole.multiplicity -= k;
        cancelled |= k > 0;
    }
    poles.retain(|r| r.multiplicity > 0);
    Ok(cancelled)
}

/// Divides both polynomials by `s − root`, returning the quotients and the
/// combined relative deflation error.
fn deflate_pair(num: &Polynomial, den: &Polynomial, root: Complex64) -> (Polynomial, Polynomial, f64) {
    // backward error of `root` as a zero of each polynomial; the common root
    // must be good for both
    let backward = |p: &Polynomial| p.eval(root).norm() / p.taylor_scale(0, root.norm());
    let err = backward(num).max(backward(den));
    (num.deflate_composite(root), den.deflate_composite(root), err)
}

/// First `n` coefficients of the power series `a(h)/b(h)`.
fn series_divide(a: &Polynomial, b: &Polynomial, n: usize) -> Vec<Complex64> {
    let b0 = b.coeff(0);
    let mut out = vec![c(0.0); n];
    for j in 0..n {
        let mut acc = a.coeff(j);
        for i in 1..=j {
            acc -= b.coeff(i) * out[j - i];
        }
        out[j] = acc / b0;
    }
    out
}

fn dens_match(a: &Polynomial, b: &Polynomial) -> bool {
    if a.degree() != b.degree() {
        return false;
    }
    let scale = a.max_abs_coeff().max(b.max_abs_coeff());
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .all(|(x, y)| (x - y).norm() <= 4.0 * f64::EPSILON * scale)
}

/// Cofactors `(fa, fb)` with `a·fa ≈ b·fb` up to the leading coefficients:
/// each denominator with the poles it shares with the other divided out.
/// `None` when nothing is shared.
fn cofactors(a: &Polynomial, b: &Polynomial) -> Option<(Polynomial, Polynomial)> {
    if a.degree() < 1 || b.degree() < 1 {
        return None;
    }
    let (ra, rb) = (a.roots().ok()?, b.roots().ok()?);
    let (mut fa, mut fb) = (b.clone(), a.clone());
    let mut shared = false;
    for x in ra.iter() {
        for y in rb.iter().filter(|y| same_root(x.value, y.value)) {
            for _ in 0..x.multiplicity.min(y.multiplicity) {
                fa = Polynomial::deflate_composite(&fa, y.value);
                fb = Polynomial::deflate_composite(&fb, x.value);
            }
            shared = true;
        }
    }
    shared.then_some((fa, fb))
}

/// Both polynomials divided by the denominator's leading coefficient, which
/// is then exactly one.
fn monic_pair(num: &Polynomial, den: &Polynomial) -> (Polynomial, Polynomial) {
    let k = den.lead().inv();
    let mut d = den.scale(k).into_coeffs();
    if let Some(last) = d.last_mut() {
        *last = c(1.0);
    }
    (num.scale(k), Polynomial::new(d))
}

/// Sum of multiplicities.
fn multiplicity(roots: &[Root]) -> usize {
    roots.iter().map(|r| r.multiplicity).sum()
}

/// Merges `b` into `a`, joining multiplicities of matching roots with `join`.
fn merge_roots(a: &[Root], b: &[Root], join: fn(usize, usize) -> usize) -> Vec<Root> {
    let mut out = a.to_vec();
    for r in b {
        match out.iter_mut().find(|x| same_root(x.value, r.value)) {
            Some(x) => x.multiplicity = join(x.multiplicity, r.multiplicity),
            None => out.push(*r),
        }
    }
    out
}

/// `Π (s − p)^(m_lcm − m_own)` over the roots of `lcm`.
fn lcm_cofactor(lcm: &[Root], own: &[Root]) -> Polynomial {
    let missing = lcm
        .iter()
        .map(|r| {
            let have = own
                .iter()
                .find(|x| same_root(x.value, r.value))
                .map_or(0, |x| x.multiplicity);
            Root { value: r.value, multiplicity: r.multiplicity - have }
        })
        .collect();
    Polynomial::from_roots(c(1.0), &RootSet::new(missing))
}

fn combine(a: &RationalFunction, b: &RationalFunction, sign: f64) -> RationalFunction {
    if let (Some(pa), Some(pb)) = (&a.expansion, &b.expansion) {
        let mut terms = pa.terms.clone();
        terms.extend(pb.terms.iter().map(|t| PoleTerm { coefficient: t.coefficient * sign, ..*t }));
        return RationalFunction::from_expansion(PartialFractions {
            polynomial_part: &pa.polynomial_part + &pb.polynomial_part.scale(c(sign)),
            terms,
        });
    }
    let b_num = b.num.scale(c(sign));
    let ratio = a.den.lead() / b.den.lead();
    let raw = if dens_match(&a.den, &b.den) {
        RationalFunction {
            num: &a.num + &b_num,
            den: a.den.clone(),
            poles: a.known_poles().or(b.known_poles()).cloned(),
            expansion: None,
        }
    } else if let (Some(pa), Some(pb)) = (a.known_poles(), b.known_poles()) {
        let lcm = merge_roots(pa, pb, usize::max);
        let (fa, fb) = (lcm_cofactor(&lcm, pa), lcm_cofactor(&lcm, pb));
        RationalFunction {
            num: &(&a.num * &fa) + &(&b_num * &fb).scale(ratio),
            den: Polynomial::from_roots(a.den.lead(), &RootSet::new(lcm.clone())),
            poles: Some(lcm),
            expansion: None,
        }
    } else if let Some((fa, fb)) = cofactors(&a.den, &b.den) {
        // a/A + b/B over the common multiple A·fa, where B·fb has the same roots
        RationalFunction {
            num: &(&a.num * &fa) + &(&b_num * &fb).scale(ratio),
            den: &a.den * &fa,
            poles: None,
            expansion: None,
        }
    } else {
        RationalFunction {
            num: &(&a.num * &b.den) + &(&b_num * &a.den),
            den: &a.den * &b.den,
            poles: None,
            expansion: None,
        }
    };
    raw.normalize().expect("nonzero denominators")
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        combine(self, rhs, 1.0)
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        combine(self, rhs, -1.0)
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        let poles = match (self.known_poles(), rhs.known_poles()) {
            (Some(a), Some(b)) => Some(merge_roots(a, b, |x, y| x + y)),
            _ => None,
        };
        RationalFunction {
            num: &self.num * &rhs.num,
            den: &self.den * &rhs.den,
            poles,
            expansion: None,
        }
        .normalize()
        .expect("nonzero denominators")
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        self.scale(c(-1.0))
    }
}
