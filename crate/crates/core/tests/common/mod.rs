#![allow(dead_code)]

use lti_laplace::crosstalk::{AggressorParams, VictimParams};
use lti_laplace::{Complex64, Mode, Polynomial, SystemSpec, TimeExpr};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SHIFTS: [f64; 3] = [0.0, 1.0, 2.5];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `|a − b| ≤ tol·max(|a|, |b|, floor)`.
pub fn rel_close(a: Complex64, b: Complex64, tol: f64, floor: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(floor)
}

pub fn random_complex(rng: &mut impl Rng, r: f64) -> Complex64 {
    cx(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

/// One mode with `power ≤ 3`, `Re λ ∈ [re_lo, re_hi]`, half of them oscillating.
pub fn random_mode(rng: &mut impl Rng, re: (f64, f64), shifts: &[f64]) -> Mode {
    let amplitude = random_complex(rng, 2.0);
    let power = rng.gen_range(0..=3);
    let im = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(-3.0..3.0) };
    let exponent = cx(rng.gen_range(re.0..=re.1), im);
    let shift = shifts[rng.gen_range(0..shifts.len())];
    Mode::new(amplitude, power, exponent, shift)
}

/// Between one and `max_modes` modes with `Re λ ∈ [−5, 1]`.
pub fn random_signal(rng: &mut impl Rng, max_modes: usize, shifts: &[f64]) -> TimeExpr {
    random_signal_in(rng, max_modes, (-5.0, 1.0), shifts)
}

pub fn random_signal_in(rng: &mut impl Rng, max_modes: usize, re: (f64, f64), shifts: &[f64]) -> TimeExpr {
    let n = rng.gen_range(1..=max_modes);
    TimeExpr::new((0..n).map(|_| random_mode(rng, re, shifts)).collect()).unwrap()
}

/// Real-valued input: a gated step plus a decaying exponential and a damped cosine.
pub fn random_real_input(rng: &mut impl Rng) -> TimeExpr {
    let step = TimeExpr::step(SHIFTS[rng.gen_range(0..3)]).scale(cx(rng.gen_range(-2.0..2.0), 0.0));
    let decay = TimeExpr::exp(cx(rng.gen_range(-3.0..-0.2), 0.0)).scale(cx(rng.gen_range(-2.0..2.0), 0.0));
    let w = rng.gen_range(0.3..3.0);
    let damp = rng.gen_range(-2.0..-0.1);
    let cosine = TimeExpr::cos(w).multiply_exp(cx(damp, 0.0)).scale(cx(rng.gen_range(-1.0..1.0), 0.0));
    &(&step + &decay) + &cosine
}

/// Real monic polynomial from real roots and conjugate pairs.
pub fn real_poly_from_roots(real: &[f64], pairs: &[Complex64]) -> Vec<f64> {
    let mut p = vec![1.0];
    let mul = |p: &[f64], q: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; p.len() + q.len() - 1];
        for (i, a) in p.iter().enumerate() {
            for (j, b) in q.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out
    };
    for &r in real {
        p = mul(&p, &[-r, 1.0]);
    }
    for &z in pairs {
        p = mul(&p, &[z.norm_sqr(), -2.0 * z.re, 1.0]);
    }
    p
}

/// Stable real system of order `1..=max_order` with `Re p ∈ [−3, −0.3]`.
pub fn random_stable_system(rng: &mut impl Rng, max_order: usize) -> SystemSpec {
    let order = rng.gen_range(1..=max_order);
    let mut real = Vec::new();
    let mut pairs = Vec::new();
    while real.len() + 2 * pairs.len() < order {
        if order - real.len() - 2 * pairs.len() >= 2 && rng.gen_bool(0.5) {
            pairs.push(cx(rng.gen_range(-3.0..-0.3), rng.gen_range(0.2..3.0)));
        } else {
            real.push(rng.gen_range(-3.0..-0.3));
        }
    }
    let scale = rng.gen_range(0.5..2.0);
    let alpha: Vec<f64> = real_poly_from_roots(&real, &pairs).iter().map(|a| a * scale).collect();
    let m = rng.gen_range(0..=order);
    let mut beta: Vec<f64> = (0..=m).map(|_| rng.gen_range(-2.0..2.0)).collect();
    if beta.iter().all(|b| b.abs() < 0.1) {
        beta[0] = 1.0;
    }
    SystemSpec::new(alpha, beta).unwrap()
}

pub fn random_params(rng: &mut impl Rng) -> (AggressorParams, VictimParams) {
    let mut v = || rng.gen_range(0.5..2.0);
    (
        AggressorParams { r1a: v(), r2a: v(), rth: v(), c1a: v(), c2a: v(), c3a: v() },
        VictimParams { r1v: v(), r2v: v(), rd: v(), cc: v(), c1v: v(), c2v: v(), c3v: v() },
    )
}

/// Five points with `Re s ≥ base + 1`.
pub fn sample_points(rng: &mut impl Rng, base: f64) -> Vec<Complex64> {
    (0..5)
        .map(|k| cx(base + 1.0 + 0.5 * k as f64 + rng.gen_range(0.0..0.5), rng.gen_range(-3.0..3.0)))
        .collect()
}

// proptest strategies

pub fn complex_strategy(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(re, im)| cx(re, im))
}

pub fn poly_strategy(max_degree: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(complex_strategy(5.0), 1..=max_degree + 1).prop_map(Polynomial::new)
}

pub fn mode_strategy(shifts: &'static [f64]) -> impl Strategy<Value = Mode> {
    (
        complex_strategy(2.0),
        0u32..=3,
        -5.0..1.0f64,
        prop_oneof![Just(0.0), -3.0..3.0f64],
        0..shifts.len(),
    )
        .prop_map(move |(amp, power, re, im, k)| Mode::new(amp, power, cx(re, im), shifts[k]))
}

pub fn signal_strategy(shifts: &'static [f64]) -> impl Strategy<Value = TimeExpr> {
    prop::collection::vec(mode_strategy(shifts), 1..=4).prop_map(|m| TimeExpr::new(m).unwrap())
}
