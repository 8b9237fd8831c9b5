//! Complex polynomial and rational-function arithmetic.

mod dd;
mod polynomial;
mod rational;
mod roots;

pub use polynomial::Polynomial;
pub use rational::{PartialFractions, PoleTerm, RationalFunction};
pub use roots::{Root, RootSet, CLUSTER_TOL};

use num_complex::Complex64;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
