//! Simultaneous root finding (Aberth–Ehrlich) with multiplicity detection.
//!
//! Aberth iterates converge only to about `ε^(1/m)` around a root of
//! multiplicity `m`, so raw iterates are grouped into candidate clusters and
//! each cluster is accepted as an `m`-fold root only when the centroid,
//! refined by Newton on `p^(m−1)`, annihilates `p, p', …, p^(m−1)` to
//! rounding level. Once the multiplicity structure is known, all roots are
//! polished together by Gauss–Newton on the coefficients of `Π (s − rᵢ)^mᵢ`,
//! which is well conditioned even where the roots themselves are not.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::Polynomial;
use crate::error::{Error, Result};

/// Roots closer than `CLUSTER_TOL·(1 + |r|)` are the same root.
pub const CLUSTER_TOL: f64 = 1e-7;

const CONVERGENCE_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 200;
/// Relative size below which a Taylor coefficient counts as vanishing.
const VANISH_TOL: f64 = 1e-11;
/// Radius, relative to the root modulus, searched for multiple-root clusters.
const LOOSE_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Distinct roots with multiplicities.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RootSet {
    roots: Vec<Root>,
}

impl RootSet {
    pub fn new(roots: Vec<Root>) -> Self {
        Self { roots }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Root> {
        self.roots.iter()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Sum of multiplicities.
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().map(|r| r.value.norm()).fold(0.0, f64::max)
    }

    pub fn max_real(&self) -> f64 {
        self.roots
            .iter()
            .map(|r| r.value.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Root within clustering tolerance of `z`, if any.
    pub fn find(&self, z: Complex64) -> Option<usize> {
        self.roots
            .iter()
            .position(|r| same_root(r.value, z))
    }
}

impl<'a> IntoIterator for &'a RootSet {
    type Item = &'a Root;
    type IntoIter = std::slice::Iter<'a, Root>;
    fn into_iter(self) -> Self::IntoIter {
        self.roots.iter()
    }
}

pub(crate) fn same_root(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= CLUSTER_TOL * (1.0 + a.norm().max(b.norm()))
}

pub(crate) fn find_roots(p: &Polynomial) -> Result<RootSet> {
    if p.degree() < 1 {
        return Err(Error::NoRoots);
    }
    let coeffs = p.coeffs();
    let zeros_at_origin = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let reduced = Polynomial::new(coeffs[zeros_at_origin..].to_vec());

    let mut roots = Vec::new();
    if zeros_at_origin > 0 {
        roots.push(Root {
            value: Complex64::new(0.0, 0.0),
            multiplicity: zeros_at_origin,
        });
    }
    if reduced.degree() >= 1 {
        let approx = aberth(&reduced);
        roots.extend(polish_structured(&reduced, cluster(&reduced, approx)));
    }
    Ok(RootSet::new(merge_close(roots)))
}

/// Initial guesses on circles whose radii come from the upper convex hull of
/// `(k, log|aₖ|)` (Bini's Newton-polygon start).
fn initial_guesses(p: &Polynomial) -> Vec<Complex64> {
    let coeffs = p.coeffs();
    let n = coeffs.len() - 1;
    let pts: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(k, c)| (k, c.norm().ln()))
        .collect();

    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (k1, y1) = hull[hull.len() - 2];
            let (k2, y2) = hull[hull.len() - 1];
            // drop the middle point unless it lies strictly above the chord
            let cross = (k2 as f64 - k1 as f64) * (pt.1 - y1) - (y2 - y1) * (pt.0 as f64 - k1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }

    let mut guesses = Vec::with_capacity(n);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (k1, y1) = w[0];
        let (k2, y2) = w[1];
        let m = k2 - k1;
        let radius = ((y1 - y2) / m as f64).exp();
        for j in 0..m {
            let angle = 2.0 * PI * j as f64 / m as f64 + 2.0 * PI * k1 as f64 / n as f64 + sigma;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}

fn aberth(p: &Polynomial) -> Vec<Complex64> {
    let mut z = initial_guesses(p);
    let n = z.len();
    let abs_coeffs: Vec<f64> = p.coeffs().iter().map(|c| c.norm()).collect();
    let mut done = vec![false; n];

    for _ in 0..MAX_ITERATIONS {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (v, dv) = p.eval_with_derivative(z[i]);
            let r = z[i].norm();
            let backward = abs_coeffs.iter().rev().fold(0.0, |acc, &a| acc * r + a);
            if v.norm() <= 4.0 * f64::EPSILON * backward {
                done[i] = true;
                continue;
            }
            let ratio = if dv.norm() == 0.0 {
                Complex64::new(1e-8 * (1.0 + r), 0.0)
            } else {
                v / dv
            };
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
            }
            if step.norm() <= CONVERGENCE_TOL * z[i].norm() {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    z
}

/// Newton on `p^(order)` starting from `start`. Returns `None` if the iterate
/// wanders further than `radius` away.
fn refine_center(p: &Polynomial, order: usize, start: Complex64, radius: f64) -> Option<Complex64> {
    let mut x = start;
    for _ in 0..30 {
        let t = p.taylor_shift(x);
        let num = t.coeff(order);
        let den = t.coeff(order + 1) * (order + 1) as f64;
        if den.norm() == 0.0 {
            break;
        }
        let step = num / den;
        if !step.is_finite() {
            return None;
        }
        x -= step;
        if (x - start).norm() > radius {
            return None;
        }
        if step.norm() <= f64::EPSILON * x.norm().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Some(x)
}

/// True when `p, p', …, p^(m−1)` all vanish to rounding level at `x`.
fn is_multiple_root(p: &Polynomial, x: Complex64, m: usize) -> bool {
    let t = p.taylor_shift(x);
    let r = x.norm();
    (0..m).all(|j| t.coeff(j).norm() <= VANISH_TOL * p.taylor_scale(j, r))
}

/// Every member is closer to `center` than half the distance of any other point.
fn stands_clear(points: &[Complex64], center: Complex64, members: &[usize]) -> bool {
    let inner = members.iter().map(|&i| (points[i] - center).norm()).fold(0.0, f64::max);
    let outer = (0..points.len())
        .filter(|i| !members.contains(i))
        .map(|i| (points[i] - center).norm())
        .fold(f64::INFINITY, f64::min);
    inner < 0.5 * outer
}

fn nearest(points: &[Complex64], center: Complex64, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        (points[a] - center)
            .norm()
            .total_cmp(&(points[b] - center).norm())
    });
    idx.truncate(k);
    idx
}

fn cluster(p: &Polynomial, approx: Vec<Complex64>) -> Vec<Root> {
    let scale = approx.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut pending = approx;
    let mut out = Vec::new();

    while let Some(&z) = pending.first() {
        let radius = LOOSE_RADIUS * z.norm().max(1e-3 * scale);
        let within = pending.iter().filter(|w| (**w - z).norm() <= radius).count();

        // near a crowd of roots p is tiny everywhere, so a vanishing Taylor
        // expansion alone can certify a point between two clusters; groups
        // standing clear of the other iterates are preferred
        let mut accepted: Option<(Complex64, Vec<usize>)> = None;
        'search: for separated in [true, false] {
            for m in (2..=within).rev() {
                let group = nearest(&pending, z, m);
                let centroid = group.iter().map(|&i| pending[i]).sum::<Complex64>() / m as f64;
                let Some(center) = refine_center(p, m - 1, centroid, radius) else {
                    continue;
                };
                let members = nearest(&pending, center, m);
                if separated && !stands_clear(&pending, center, &members) {
                    continue;
                }
                if is_multiple_root(p, center, m) {
                    accepted = Some((center, members));
                    break 'search;
                }
            }
        }

        let (value, mut taken) = match accepted {
            Some(found) => found,
            None => (polish_simple(p, z), vec![0]),
        };
        let multiplicity = taken.len();
        taken.sort_unstable_by(|a, b| b.cmp(a));
        for i in taken {
            pending.swap_remove(i);
        }
        out.push(Root { value, multiplicity });
    }
    out
}

fn polish_simple(p: &Polynomial, z: Complex64) -> Complex64 {
    let mut x = z;
    let mut best = p.eval(x).norm();
    for _ in 0..3 {
        let (v, dv) = p.eval_with_derivative(x);
        if dv.norm() == 0.0 {
            break;
        }
        let candidate = x - v / dv;
        let val = p.eval(candidate).norm();
        if !(val < best) {
            break;
        }
        best = val;
        x = candidate;
    }
    x
}

fn structured_residual(p: &Polynomial, roots: &[Root]) -> (Vec<Complex64>, f64) {
    let q = Polynomial::from_roots(p.lead(), &RootSet::new(roots.to_vec()));
    let r: Vec<Complex64> = (0..p.coeffs().len() - 1).map(|k| q.coeff(k) - p.coeff(k)).collect();
    let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (r, norm)
}

/// Gauss–Newton on `lead·Π (s − zᵢ)^mᵢ = p` with the multiplicities fixed.
/// Steps are kept only while the coefficient residual shrinks and no root
/// moves further than the clustering radius.
fn polish_structured(p: &Polynomial, mut roots: Vec<Root>) -> Vec<Root> {
    if roots.iter().all(|r| r.multiplicity == 1) {
        return roots;
    }
    let n = p.coeffs().len() - 1;
    let (mut residual, mut norm) = structured_residual(p, &roots);
    for _ in 0..8 {
        if norm == 0.0 {
            break;
        }
        // ∂/∂zᵢ of the product is −mᵢ·q(s)/(s − zᵢ); the lead coefficient is fixed
        let columns: Vec<Vec<Complex64>> = roots
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut reduced = roots.clone();
                reduced[i].multiplicity -= 1;
                let d = Polynomial::from_roots(p.lead() * -(r.multiplicity as f64), &RootSet::new(reduced));
                (0..n).map(|k| d.coeff(k)).collect()
            })
            .collect();
        let Some(step) = least_squares(columns, residual.clone()) else {
            break;
        };
        let trial: Vec<Root> = roots
            .iter()
            .zip(&step)
            .map(|(r, d)| Root { value: r.value - d, multiplicity: r.multiplicity })
            .collect();
        if trial.iter().zip(&roots).any(|(t, r)| !same_root(t.value, r.value) || !t.value.is_finite()) {
            break;
        }
        let (r, trial_norm) = structured_residual(p, &trial);
        if !(trial_norm < norm) {
            break;
        }
        roots = trial;
        residual = r;
        norm = trial_norm;
    }
    roots
}

/// Minimizes `‖A·x − b‖` by Householder QR; `a` is given column by column.
fn least_squares(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let cols = a.len();
    let rows = b.len();
    if cols > rows {
        return None;
    }
    for j in 0..cols {
        let alpha = a[j][j..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            return None;
        }
        let phase = if a[j][j].norm() == 0.0 { Complex64::new(1.0, 0.0) } else { a[j][j] / a[j][j].norm() };
        let mut v: Vec<Complex64> = a[j][j..].to_vec();
        v[0] += phase * alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let reflect = |x: &mut [Complex64]| {
            let dot: Complex64 = v.iter().zip(x.iter()).map(|(vi, xi)| vi.conj() * xi).sum();
            let f = dot * 2.0 / vnorm;
            for (xi, vi) in x.iter_mut().zip(&v) {
                *xi -= f * vi;
            }
        };
        for col in a.iter_mut().skip(j) {
            reflect(&mut col[j..]);
        }
        reflect(&mut b[j..]);
    }
    let mut x = vec![Complex64::new(0.0, 0.0); cols];
    for i in (0..cols).rev() {
        let s: Complex64 = (i + 1..cols).map(|j| a[j][i] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x.iter().all(|z| z.is_finite()).then_some(x)
}

fn merge_close(mut roots: Vec<Root>) -> Vec<Root> {
    let mut merged: Vec<Root> = Vec::with_capacity(roots.len());
    roots.sort_by(|a, b| b.multiplicity.cmp(&a.multiplicity));
    for r in roots {
        if let Some(existing) = merged.iter_mut().find(|m| same_root(m.value, r.value)) {
            let total = existing.multiplicity + r.multiplicity;
            existing.value = (existing.value * existing.multiplicity as f64
                + r.value * r.multiplicity as f64)
                / total as f64;
            existing.multiplicity = total;
        } else {
            merged.push(r);
        }
    }
    merged.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    merged
}
